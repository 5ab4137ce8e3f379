//! wasm-bindgen front end for the static demo page in `www/`.
//!
//! Every export returns a string (SVG or JSON) or an error message, so the
//! same functions run natively in tests.

use mcf_core::figure::{render_figure, FigureSpec};
use mcf_core::measure::{self, MeasureParams};
use mcf_core::systems::Algorithm;
use mcf_core::{registry, FibredSystem, ProjPoint};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Browser runs are single threaded; keep estimates interactive.
const MAX_SAMPLES: u32 = 400_000;

fn load(system: &str, n: usize) -> Result<FibredSystem, String> {
    registry(system, n).map_err(|e| e.to_string())
}

/// Catalogue as JSON: name, dimensions, digit alphabet, fullness.
#[wasm_bindgen]
pub fn systems() -> String {
    let rows: Vec<_> = Algorithm::ALL
        .iter()
        .map(|a| {
            let (lo, hi) = a.dimensions();
            json!({"name": a.name(), "min_n": lo, "max_n": hi, "alphabet": a.alphabet(), "full": a.is_full()})
        })
        .collect();
    serde_json::to_string(&rows).expect("catalogue serializes")
}

/// SVG of the depth-`depth` cylinder partition (n = 2).
#[wasm_bindgen]
pub fn figure_svg(system: &str, depth: usize, dual: bool, size: u32) -> Result<String, String> {
    let mut spec = FigureSpec::new(system, depth);
    spec.size = size.clamp(160, 1200);
    if dual {
        spec = spec.dual();
    }
    render_figure(&spec).map(|f| f.to_svg()).map_err(|e| e.to_string())
}

/// Digits of the orbit of `x` (comma separated coordinates) as JSON.
#[wasm_bindgen]
pub fn expand_orbit(system: &str, n: usize, x: &str, steps: usize) -> Result<String, String> {
    let s = load(system, n)?;
    let coords = x
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    if coords.len() != n {
        return Err(format!("expected {n} coordinates, got {}", coords.len()));
    }
    let p = ProjPoint::new(coords).map_err(|e| e.to_string())?;
    let e = s.expand(&p, steps.min(500)).map_err(|e| e.to_string())?;
    let digits: Vec<String> = e.digits.iter().map(ToString::to_string).collect();
    Ok(json!({"digits": digits, "point": e.point.coords(), "stopped": e.stopped}).to_string())
}

/// Forward and reversed cylinder measures with their z-score, as JSON.
#[wasm_bindgen]
pub fn estimate_symmetry(system: &str, n: usize, digits: &str, samples: u32, seed: u32) -> Result<String, String> {
    let s = load(system, n)?;
    let digits = s.parse_digits(digits).map_err(|e| e.to_string())?;
    if digits.is_empty() {
        return Err("give at least one digit".into());
    }
    let params = MeasureParams::default().with_samples(u64::from(samples.clamp(1000, MAX_SAMPLES))).with_seed(seed.into());
    let v = measure::symmetry_test(&s, &digits, &params).map_err(|e| e.to_string())?;
    Ok(json!({
        "digits": mcf_core::systems::format_digits(&digits),
        "forward": v.forward.value,
        "forward_stderr": v.forward.stderr,
        "reversed": v.reversed.value,
        "reversed_stderr": v.reversed.stderr,
        "z": v.z,
        "verdict": v.verdict,
        "warning": v.warning,
    })
    .to_string())
}
