//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each operation returns a JSON string. The plain functions are usable from
//! Rust; the `#[wasm_bindgen]` wrappers turn their errors into JS exceptions.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use fqsl::estimates::{check_basic_lemma, Calibration, Lemma, LemmaParams};
use fqsl::parabola::{self, ParabolaCtx};
use fqsl::polyring::Degree;
use fqsl::randmodel::{Model, ModelParams};
use fqsl::ratio::parse_ratio;

/// Largest `q'` the heatmap accepts.
pub const MAX_HEATMAP_Q: u64 = 49;

#[derive(Serialize)]
pub struct Heatmap {
    pub q_prime: u64,
    /// `counts[b][a]`: ordered triples of distinct parabola points summing to `(a, b)`.
    pub counts: Vec<Vec<u64>>,
    pub min: u64,
    pub max: u64,
}

pub fn parabola_heatmap(p: u64, h: u32, m0: u32) -> Result<Heatmap, String> {
    let ctx = ParabolaCtx::new(p, h, m0).map_err(|e| e.to_string())?;
    let qp = ctx.q_prime();
    if qp > MAX_HEATMAP_Q {
        return Err(format!("q' = {qp} is too large for the heatmap (max {MAX_HEATMAP_Q})"));
    }
    let flat = parabola::three_sum_counts(&parabola::build_parabola(&ctx));
    let counts: Vec<Vec<u64>> = flat.chunks(qp as usize).map(<[u64]>::to_vec).collect();
    Ok(Heatmap {
        q_prime: qp,
        min: flat.iter().copied().min().unwrap_or(0),
        max: flat.iter().copied().max().unwrap_or(0),
        counts,
    })
}

#[derive(Serialize)]
pub struct DegreeBin {
    pub deg: u32,
    pub observed: u64,
    pub expected: f64,
}

#[derive(Serialize)]
pub struct DegreeHistogram {
    pub size: usize,
    pub expected_size: f64,
    pub bins: Vec<DegreeBin>,
}

/// Members of a seeded sample per degree, next to their expected numbers.
pub fn degree_histogram(
    p: u64,
    n: u32,
    residues: &str,
    gamma: &str,
    m: u32,
    d: u32,
    seed: u64,
) -> Result<DegreeHistogram, String> {
    let err = |e: fqsl::Error| e.to_string();
    let params = ModelParams {
        p,
        h: 1,
        n,
        s: fqsl::commands::residue_set(residues, p, 1, n).map_err(err)?,
        gamma: parse_ratio(gamma).map_err(err)?,
        m,
        d,
        epsilon: None,
        seed,
    };
    let model = Model::new(params).map_err(err)?;
    if model.admissible_count() > 2_000_000 {
        return Err("window too large for the browser; lower D".into());
    }
    let sample = model.sample();
    let pk = model.packed();
    let bins = (m + 1..=d)
        .map(|k| DegreeBin {
            deg: k,
            observed: sample.members.iter().filter(|&&x| pk.deg(x) == Degree::new(k)).count() as u64,
            expected: model.admissible_count_of_degree(k) as f64 * model.prob_of_degree(Degree::new(k)),
        })
        .collect();
    Ok(DegreeHistogram {
        size: sample.len(),
        expected_size: model.expected_size(),
        bins,
    })
}

#[derive(Serialize)]
pub struct RatioPoint {
    pub id: String,
    pub label: String,
    pub ratio: f64,
    pub pinned: Option<f64>,
}

/// Ratio of each lemma's sum to its bound over degrees `1..=deg_max`, at `q = 5`.
pub fn lemma_ratios(lemma: &str, exponent: &str, deg_max: u32) -> Result<Vec<RatioPoint>, String> {
    let err = |e: fqsl::Error| e.to_string();
    let which: Lemma = lemma.parse().map_err(err)?;
    if !(1..=7).contains(&deg_max) {
        return Err("deg_max must lie in 1..=7".into());
    }
    let e = parse_ratio(exponent).map_err(err)?;
    let params = LemmaParams {
        alpha: e,
        beta: e,
        gamma: e,
        phi: e,
        kappa: e,
        m: if which == Lemma::Basic3 { 4 } else { -1 },
        ..LemmaParams::default()
    };
    let cal = Calibration::committed();
    let rows = check_basic_lemma(which, &params, 1..=deg_max, Some(&cal)).map_err(err)?;
    Ok(rows
        .into_iter()
        .map(|r| RatioPoint {
            label: r
                .degrees
                .iter()
                .filter(|(k, _)| k.as_str() != "M")
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(","),
            id: r.id,
            ratio: r.ratio,
            pinned: r.pinned,
        })
        .collect())
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    r.map(|v| serde_json::to_string(&v).expect("serializable"))
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = parabolaHeatmap)]
pub fn parabola_heatmap_js(p: u32, h: u32, m0: u32) -> Result<String, JsError> {
    to_js(parabola_heatmap(p.into(), h, m0))
}

#[wasm_bindgen(js_name = degreeHistogram)]
pub fn degree_histogram_js(
    p: u32,
    n: u32,
    residues: &str,
    gamma: &str,
    m: u32,
    d: u32,
    seed: u32,
) -> Result<String, JsError> {
    to_js(degree_histogram(p.into(), n, residues, gamma, m, d, seed.into()))
}

#[wasm_bindgen(js_name = lemmaRatios)]
pub fn lemma_ratios_js(lemma: &str, exponent: &str, deg_max: u32) -> Result<String, JsError> {
    to_js(lemma_ratios(lemma, exponent, deg_max))
}
