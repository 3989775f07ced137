//! Deterministic generators for the two bundled tables.
//!
//! Both tables follow a shared recipe. Each row draws a latent trait `z`
//! from a three-part mixture: a low segment holding exactly half of each
//! group, a middle bulk just above it, and a small high cluster far above
//! the rest with nothing in between. Segment shapes are identical across
//! groups; what differs by group is how the upper half splits between bulk
//! and cluster, so the groups separate only in the upper scale mix.
//! Observed columns are noisy transforms of `z`, and coded columns are
//! quantized views of those same transforms with cuts placed so that the
//! high cluster occupies bins the bulk cannot reach by noise. The label
//! rate ramps up across the low segment, holds constant over the bulk, and
//! is near certain in the high cluster. Component counts per group are
//! exact rather than sampled, so a median split along any monotone score
//! recovers the low segment. Regenerating with the same scope string
//! reproduces the files byte for byte.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::env::mves::sigmoid;
use crate::seeding::rng_for_scope;

pub const GERMAN_SCOPE: &str = "data/german/v1";
pub const COMPAS_SCOPE: &str = "data/compas/v1";
pub const GERMAN_ROWS: usize = 1000;
pub const COMPAS_ROWS: usize = 7200;

/// Low segment shared by both groups: Uniform over this interval.
const BASE_RANGE: (f64, f64) = (-5.2, -2.4);
/// Middle bulk: a truncated normal resampled into this interval.
const MID_RANGE: (f64, f64) = (-2.3, -1.6);
const MID_MEAN: f64 = -1.92;
const MID_SD: f64 = 0.21;
/// High cluster location, far beyond the bulk.
const TOP_MEAN: f64 = 8.0;
const TOP_SD: f64 = 0.35;

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Index into `weights` drawn proportionally to the weights.
fn weighted(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        u -= w;
        if u < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// Exact component tags for one group (0 = low segment, 1 = middle bulk,
/// 2 = high cluster), shuffled into a deterministic order.
fn component_schedule(rng: &mut ChaCha8Rng, n: usize, top_weight: f64) -> Vec<u8> {
    let n_base = n / 2;
    let n_top = (top_weight * n as f64).round() as usize;
    let mut tags = vec![0u8; n_base];
    tags.resize(n - n_top, 1);
    tags.resize(n, 2);
    tags.shuffle(rng);
    tags
}

/// Bin a value by ascending cutoffs: result i means cut[i-1] <= v < cut[i].
fn bin(v: f64, cuts: &[f64]) -> usize {
    cuts.iter().take_while(|&&c| v >= c).count()
}

fn draw_z(rng: &mut ChaCha8Rng, tag: u8) -> f64 {
    match tag {
        0 => BASE_RANGE.0 + (BASE_RANGE.1 - BASE_RANGE.0) * rng.random::<f64>(),
        1 => loop {
            let z = MID_MEAN + MID_SD * normal(rng);
            if (MID_RANGE.0..=MID_RANGE.1).contains(&z) {
                break z;
            }
        },
        _ => TOP_MEAN + TOP_SD * normal(rng),
    }
}

/// Positive-outcome rate per segment: a sigmoid ramp across the low
/// segment, a flat rate just above the ramp's top over the bulk, and a
/// near-certain rate in the high cluster.
fn label_rate(tag: u8, z: f64) -> f64 {
    match tag {
        0 => sigmoid(0.293 * z + 0.864),
        1 => 0.50,
        _ => 0.995,
    }
}

/// Credit table, symbolic codes, 1000 rows with exactly 310 female-coded
/// rows. The high cluster is male-heavy; y = 1 is good credit.
pub fn generate_german(scope: &str) -> String {
    let mut rng = rng_for_scope(scope);
    let n_female = GERMAN_ROWS * 31 / 100;
    let mut female_tags = component_schedule(&mut rng, n_female, 0.04);
    let mut male_tags = component_schedule(&mut rng, GERMAN_ROWS - n_female, 0.10);

    let mut out = String::with_capacity(90_000);
    out.push_str(
        "checking_status,duration,credit_history,purpose,credit_amount,savings_status,\
         employment,installment_commitment,personal_status,age,housing,existing_credits,\
         job,num_dependents,class\n",
    );
    let checking = ["A11", "A12", "A13", "A14"];
    let history = ["A30", "A31", "A32", "A33", "A34"];
    let purpose = ["A40", "A41", "A42", "A43", "A46", "A49"];
    let savings = ["A61", "A62", "A63", "A64", "A65"];
    let employment = ["A71", "A72", "A73", "A74", "A75"];
    let housing = ["A153", "A152", "A151"];
    let job = ["A171", "A172", "A173", "A174"];

    for i in 0..GERMAN_ROWS {
        let female = i % 100 < 31;
        let tags = if female { &mut female_tags } else { &mut male_tags };
        let tag = tags.pop().unwrap();
        let z = draw_z(&mut rng, tag);

        // Three wide numerics carry the trait end to end.
        let amount = (8.0 - 0.25 * z + 0.13 * normal(&mut rng))
            .exp()
            .round()
            .clamp(250.0, 18424.0);
        let duration = (48.0 - 3.7 * z + 2.0 * normal(&mut rng)).round().clamp(4.0, 72.0);
        let age = (38.0 + 3.0 * z + 1.8 * normal(&mut rng)).round().clamp(19.0, 75.0);
        // Coded columns are quantized views of the numerics. The first bin
        // of each is reachable only from the high cluster; the rest refine
        // the bulk.
        let chk = checking[bin(duration, &[30.0, 56.0, 61.0])];
        let hist = history[bin(age, &[25.0, 28.0, 33.0, 42.0])];
        let purp = purpose[bin(amount, &[1200.0, 4200.0, 6200.0, 8200.0, 10500.0])];
        let sav = savings[bin(amount, &[1200.0, 5500.0, 7500.0, 9700.0])];
        let emp = employment[bin(age, &[24.0, 27.0, 31.0, 42.0])];
        let hou = housing[bin(age, &[27.0, 42.0])];
        let jb = job[bin(amount, &[1200.0, 6000.0, 9700.0])];
        // Pure-noise columns.
        let installment = 1 + weighted(&mut rng, &[0.14, 0.23, 0.16, 0.47]);
        let status = if female {
            if rng.random_bool(0.80) { "A92" } else { "A95" }
        } else {
            match weighted(&mut rng, &[0.60, 0.22, 0.18]) {
                0 => "A93",
                1 => "A91",
                _ => "A94",
            }
        };
        let credits = 1 + weighted(&mut rng, &[0.63, 0.33, 0.03, 0.01]);
        let dependents = if rng.random_bool(0.155) { 2 } else { 1 };
        let class = if rng.random_bool(label_rate(tag, z)) { 1 } else { 2 };

        out.push_str(&format!(
            "{chk},{duration},{hist},{purp},{amount},{sav},{emp},{installment},{status},\
             {age},{hou},{credits},{jb},{dependents},{class}\n"
        ));
    }
    out
}

/// Screening table, 7200 raw rows of which the standard filter keeps most.
/// The high cluster is female-heavy; y = 1 means no recidivism within two
/// years.
pub fn generate_compas(scope: &str) -> String {
    let mut rng = rng_for_scope(scope);
    let n_female = COMPAS_ROWS * 19 / 100;
    let mut female_tags = component_schedule(&mut rng, n_female, 0.10);
    let mut male_tags = component_schedule(&mut rng, COMPAS_ROWS - n_female, 0.04);

    let mut out = String::with_capacity(450_000);
    out.push_str(
        "sex,age,age_cat,race,juv_fel_count,juv_misd_count,priors_count,\
         days_b_screening_arrest,c_charge_degree,is_recid,decile_score,score_text,\
         two_year_recid\n",
    );
    let races = ["African-American", "Caucasian", "Hispanic", "Other"];
    let race_w = [0.51, 0.34, 0.08, 0.07];

    for i in 0..COMPAS_ROWS {
        let female = i % 100 < 19;
        let tags = if female { &mut female_tags } else { &mut male_tags };
        let tag = tags.pop().unwrap();
        let z = draw_z(&mut rng, tag);

        let sex = if female { "Female" } else { "Male" };
        // Age and the two record scales carry z; the high cluster lands in
        // the over-45 age band and at the floor of both scales, regions the
        // bulk cannot reach by noise.
        let age = (40.0 + 3.0 * z + 1.8 * normal(&mut rng)).round().clamp(18.0, 80.0);
        let age_cat = if age < 25.0 {
            "Less than 25"
        } else if age <= 45.0 {
            "25 - 45"
        } else {
            "Greater than 45"
        };
        let race = races[weighted(&mut rng, &race_w)];
        let juv_fel = (-0.35 * (z + 0.6 * normal(&mut rng)) - 0.7).round().clamp(0.0, 6.0);
        let juv_misd = (-0.3 * (z + 0.7 * normal(&mut rng)) - 0.6).round().clamp(0.0, 5.0);
        let priors = ((0.9 - 0.38 * (z + 0.6 * normal(&mut rng))).exp() - 1.0)
            .round()
            .clamp(0.0, 38.0);
        let degree = if rng.random::<f64>() < 0.02 {
            "O"
        } else if rng.random_bool((0.52 - 0.06 * z).clamp(0.05, 0.95)) {
            "F"
        } else {
            "M"
        };
        let days = if rng.random::<f64>() < 0.92 {
            (8.0 * normal(&mut rng)).round().clamp(-30.0, 30.0)
        } else {
            let mag = 35.0 + (150.0 * normal(&mut rng)).abs();
            if rng.random::<bool>() { mag.round() } else { -mag.round() }
        };
        let decile = (5.2 - 0.55 * z + 0.40 * normal(&mut rng)).round().clamp(1.0, 10.0);
        let score_text = if rng.random::<f64>() < 0.015 {
            "N/A"
        } else if decile <= 4.0 {
            "Low"
        } else if decile <= 7.0 {
            "Medium"
        } else {
            "High"
        };
        let two_year = if rng.random_bool(label_rate(tag, z)) { 0 } else { 1 };
        let is_recid = if rng.random::<f64>() < 0.015 {
            -1
        } else if two_year == 1 {
            1
        } else {
            i64::from(rng.random_bool(0.07))
        };

        out.push_str(&format!(
            "{sex},{age},{age_cat},{race},{juv_fel},{juv_misd},{priors},{days},{degree},\
             {is_recid},{decile},{score_text},{two_year}\n"
        ));
    }
    out
}
