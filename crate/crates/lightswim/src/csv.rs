//! CSV writers with a fixed column order.

use std::fmt::Write as _;

use lightswim_core::ga::{PoolStrategy, Selection};
use lightswim_core::optimizer::{Algorithm, AlgorithmConfig};
use lightswim_core::sweep::SweepCell;

/// `%.{digits}g`-style formatting: `digits` significant digits, trailing
/// zeros dropped, scientific notation outside `1e-5 <= |x| < 10^digits`.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("`e` formatting has an exponent");
    let exp: i32 = exp.parse().expect("numeric exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn f9(x: f64) -> String {
    fmt_sig(x, 9)
}

pub fn config_field_names(algorithm: Algorithm) -> &'static [&'static str] {
    match algorithm {
        Algorithm::Ga => &["selection", "pool", "m_min", "m_max", "adaptive", "population", "pairs"],
        Algorithm::Pso => &["w", "c1", "c2", "swarm", "max_dedup_steps"],
    }
}

pub fn config_field_values(config: &AlgorithmConfig) -> Vec<String> {
    match config {
        AlgorithmConfig::Ga(c) => vec![
            match c.selection {
                Selection::Rank => "rank".into(),
                Selection::Roulette => "roulette".into(),
            },
            match c.pool {
                PoolStrategy::Elite8 => "elite8".into(),
                PoolStrategy::AllHistory => "all_history".into(),
            },
            f9(c.m_min),
            f9(c.m_max),
            c.adaptive.to_string(),
            c.population.to_string(),
            c.pairs.to_string(),
        ],
        AlgorithmConfig::Pso(c) => {
            vec![f9(c.w), f9(c.c1), f9(c.c2), c.swarm.to_string(), c.max_dedup_steps.to_string()]
        }
    }
}

pub fn sweep_header(algorithm: Algorithm) -> String {
    let mut cols = vec!["sigma", "algorithm"];
    cols.extend_from_slice(config_field_names(algorithm));
    cols.extend_from_slice(&["mean_best", "std_best", "normalized_mean", "repetitions"]);
    cols.join(",")
}

/// One row per (σ, cell), header first, `\n` line endings.
pub fn sweep_csv(algorithm: Algorithm, cells: &[SweepCell]) -> String {
    let mut out = sweep_header(algorithm);
    out.push('\n');
    for c in cells {
        let mut row = vec![f9(c.sigma), c.config.algorithm().as_str().to_string()];
        row.extend(config_field_values(&c.config));
        row.extend([f9(c.mean_best), f9(c.std_best), f9(c.normalized_mean), c.repetitions.to_string()]);
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}
