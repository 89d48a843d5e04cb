//! JSON-in/JSON-out wrappers around fqpe for the static page in `www/`.

use fqpe::filter::design::verify_grid;
use fqpe::filter::{self as flt, Basis, FilterSeries};
use fqpe::model::{hubbard_neel_model, synthetic_model, HubbardSpec, Lattice, NeelPattern, ScalePolicy, SpectralModel, Spin};
use fqpe::sweep::{self, LambdaChoice};
use serde::Deserialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

type Res<T> = std::result::Result<T, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", tag = "design")]
pub enum FilterRequest {
    GaussianTrig { e0: f64, e1: f64, eps_prime: f64, eps_g: f64 },
    GaussianCheb { e0: f64, e1: f64, eps_prime: f64, eps_g: f64 },
    MinimaxTrig { delta: f64, n: usize },
    MinimaxPoly { delta: f64, n: usize },
    Kaiser { delta: f64, n: usize },
}

/// Plot resolution for curves sent to the page.
const CURVE_POINTS: usize = 401;

fn curve(f: &FilterSeries) -> Value {
    let grid = verify_grid();
    let step = (grid.len() - 1) / (CURVE_POINTS - 1);
    let xs: Vec<f64> = grid.iter().step_by(step).copied().collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f.eval(x).norm()).collect();
    json!({ "x": xs, "y": ys })
}

fn build(req: &FilterRequest) -> Res<(FilterSeries, Value)> {
    Ok(match *req {
        FilterRequest::GaussianTrig { e0, e1, eps_prime, eps_g } => {
            let d = flt::design_gaussian_trig(e0.clamp(-1.0, 1.0), e0, e1, eps_prime, eps_g).map_err(err)?;
            let info = json!({ "order": d.order, "sigma": d.target.sigma, "max_deviation": d.max_deviation });
            (d.series, info)
        }
        FilterRequest::GaussianCheb { e0, e1, eps_prime, eps_g } => {
            let d = flt::design_gaussian_cheb(e0.clamp(-1.0, 1.0), e0, e1, eps_prime, eps_g).map_err(err)?;
            let info = json!({ "order": d.order, "sigma": d.target.sigma, "max_deviation": d.max_deviation });
            (d.series, info)
        }
        FilterRequest::MinimaxTrig { delta, n } => {
            let d = flt::design_cheb_minimax_trig(delta, n).map_err(err)?;
            (d.series, json!({ "order": 2 * n, "eps_n": d.eps_n }))
        }
        FilterRequest::MinimaxPoly { delta, n } => {
            let d = flt::design_cheb_minimax_poly(delta, n).map_err(err)?;
            (d.series, json!({ "order": 2 * n, "eps_n": d.eps_n }))
        }
        FilterRequest::Kaiser { delta, n } => (flt::design_kaiser_trig(delta, n).map_err(err)?, json!({ "order": n })),
    })
}

pub fn demo_model_json(name: &str) -> Res<String> {
    let m = match name {
        "chain7" => {
            let spec = HubbardSpec::new(Lattice::Chain { length: 7 }, 1.0, 10.0, 2, 2).map_err(err)?;
            hubbard_neel_model(&spec, NeelPattern::LeftPackedAlternating, Spin::Up, ScalePolicy::default()).map_err(err)?
        }
        "dimer" => {
            let spec = HubbardSpec::new(Lattice::Chain { length: 2 }, 1.0, 10.0, 1, 1).map_err(err)?;
            hubbard_neel_model(&spec, NeelPattern::LeftPackedAlternating, Spin::Up, ScalePolicy::default()).map_err(err)?
        }
        "toy" => {
            let mut e = vec![-0.6, -0.5];
            let mut w = vec![0.1, 0.1];
            for k in 0..24 {
                e.push(-0.45 + 0.05 * k as f64);
                w.push(0.8 / 24.0);
            }
            synthetic_model(e, w).map_err(err)?
        }
        other => return Err(format!("unknown demo model '{other}'")),
    };
    Ok(m.to_json())
}

fn model(s: &str) -> Res<SpectralModel> {
    SpectralModel::from_json(s).map_err(err)
}

/// Design a filter; returns its coefficients, |f| on a grid and design details.
pub fn design_filter_json(request: &str) -> Res<String> {
    let req: FilterRequest = serde_json::from_str(request).map_err(err)?;
    let (f, info) = build(&req)?;
    Ok(json!({ "series": f, "curve": curve(&f), "info": info, "sup_norm": f.sup_norm() }).to_string())
}

/// Filtered-state report of a designed filter against a model, with the relative cost at eps/gap.
pub fn filtered_report_json(model_json: &str, request: &str, eps_over_gap: f64) -> Res<String> {
    let m = model(model_json)?;
    let req: FilterRequest = serde_json::from_str(request).map_err(err)?;
    let (f, info) = build(&req)?;
    let r = flt::filtered_state_report(&m, &f);
    let order = info["order"].as_u64().unwrap_or(f.order() as u64) as usize;
    let eps = eps_over_gap * m.gap();
    let rel = match f.basis() {
        Basis::Trig if m.gap().is_finite() => sweep::plan_relative_cost(&m, &r, Basis::Trig, order, eps, None).map_err(err)?,
        _ => None,
    };
    Ok(json!({
        "report": r,
        "rel_cost": rel,
        "curve": curve(&f),
        "energies": m.energies(),
        "weights": m.overlaps_sq(),
        "info": info,
    })
    .to_string())
}

/// Krylov filter of order n with penalty `lambda` ("zero", "star" or a number).
pub fn krylov_curve_json(model_json: &str, n: usize, lambda: &str, eps_over_gap: f64) -> Res<String> {
    let m = model(model_json)?;
    if !m.gap().is_finite() {
        return Err("model needs at least two levels".into());
    }
    let eps = eps_over_gap * m.gap();
    let lam = LambdaChoice::parse(lambda).map_err(err)?.value(n, eps);
    let pair = fqpe::krylov::build_krylov(&m, Basis::Trig, n).map_err(err)?;
    let sol = fqpe::krylov::solve_modified_ksd(&pair, lam, fqpe::krylov::DEFAULT_THRESHOLD).map_err(err)?;
    let f = fqpe::krylov::krylov_filter(&sol, &pair).map_err(err)?;
    let r = flt::filtered_state_report(&m, &f);
    let rel = sweep::plan_relative_cost(&m, &r, Basis::Trig, n, eps, None).map_err(err)?;
    Ok(json!({
        "lambda": lam,
        "ground_energy": sol.ground_energy,
        "e0_err_over_gap": (sol.ground_energy - m.ground_energy()) / m.gap(),
        "retained_rank": sol.retained_rank,
        "report": r,
        "rel_cost": rel,
        "curve": curve(&f),
        "energies": m.energies(),
        "weights": m.overlaps_sq(),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn demo_model(name: &str) -> std::result::Result<String, JsValue> {
    demo_model_json(name).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn design_filter(request: &str) -> std::result::Result<String, JsValue> {
    design_filter_json(request).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn filtered_report(model_json: &str, request: &str, eps_over_gap: f64) -> std::result::Result<String, JsValue> {
    filtered_report_json(model_json, request, eps_over_gap).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn krylov_curve(model_json: &str, n: usize, lambda: &str, eps_over_gap: f64) -> std::result::Result<String, JsValue> {
    krylov_curve_json(model_json, n, lambda, eps_over_gap).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn design_round_trip() {
        let out: Value = serde_json::from_str(&design_filter_json(r#"{"design":"minimax_trig","delta":0.2,"n":8}"#).unwrap()).unwrap();
        assert_eq!(out["curve"]["x"].as_array().unwrap().len(), CURVE_POINTS);
        assert!(out["sup_norm"].as_f64().unwrap() <= 1.0 + 1e-9);
        assert!(design_filter_json(r#"{"design":"kaiser","delta":2.0,"n":8}"#).is_err());
    }

    #[test]
    fn report_on_toy() {
        let m = demo_model_json("toy").unwrap();
        let req = r#"{"design":"gaussian_trig","e0":-0.6,"e1":-0.5,"eps_prime":0.0,"eps_g":1e-4}"#;
        let out: Value = serde_json::from_str(&filtered_report_json(&m, req, 1e-3).unwrap()).unwrap();
        let ov = out["report"]["overlap_f0_sq"].as_f64().unwrap();
        assert!(ov > 0.9, "{ov}");
        assert!(out["rel_cost"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn krylov_on_toy() {
        let m = demo_model_json("toy").unwrap();
        let out: Value = serde_json::from_str(&krylov_curve_json(&m, 12, "star", 1e-3).unwrap()).unwrap();
        assert!(out["retained_rank"].as_u64().unwrap() >= 1);
        assert!(krylov_curve_json(&m, 12, "-1", 1e-3).is_err());
    }

    #[test]
    fn dimer_oracle() {
        let m = SpectralModel::from_json(&demo_model_json("dimer").unwrap()).unwrap();
        let e = m.ground_energy() * m.scale();
        assert!((e - (10.0 - 116f64.sqrt()) / 2.0).abs() < 1e-10);
    }
}
