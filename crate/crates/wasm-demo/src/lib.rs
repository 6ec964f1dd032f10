//! Browser bindings: point classification, numerical radius with the
//! fundamental operator, and polynomial variety verdicts. Every function
//! returns a JSON string so the page can stay plain JavaScript.

use num_complex::Complex64;
use symbidisc::bipoly::{classify_bidisc, classify_gamma};
use symbidisc::gamma_geom::{classify_point, peak_bgamma, GammaPoint};
use symbidisc::io::{parse_matrix, parse_pair, parse_poly};
use symbidisc::numlin::numerical_radius;
use symbidisc::pairs::fundamental_operator;
use wasm_bindgen::prelude::*;

fn to_js<E: std::fmt::Display>(e: E) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, JsValue> {
    serde_json::to_string(v).map_err(to_js)
}

/// Region of `(s, p)` plus the margins behind the decision.
#[wasm_bindgen]
pub fn classify_gamma_point(s_re: f64, s_im: f64, p_re: f64, p_im: f64, tol: f64) -> Result<String, JsValue> {
    let pt = GammaPoint::new(Complex64::new(s_re, s_im), Complex64::new(p_re, p_im));
    let verdict = classify_point(pt, tol);
    let mut out = serde_json::to_value(&verdict).map_err(to_js)?;
    if let Ok(peak) = peak_bgamma(pt) {
        let value = peak.evaluate(pt);
        out["peak_value"] = serde_json::json!([value.re, value.im]);
    }
    json(&out)
}

/// `ω(M)` of a matrix in `{"rows","cols","data"}` form.
#[wasm_bindgen]
pub fn matrix_numerical_radius(matrix_json: &str) -> Result<f64, JsValue> {
    let m = parse_matrix(matrix_json).map_err(to_js)?;
    numerical_radius(&m).map_err(to_js)
}

/// Fundamental operator of a pair `{"S","P"}` and its numerical radius.
#[wasm_bindgen]
pub fn pair_fundamental(pair_json: &str) -> Result<String, JsValue> {
    let pair = parse_pair(pair_json).map_err(to_js)?;
    pair.validate().map_err(to_js)?;
    let f = fundamental_operator(&pair).map_err(to_js)?;
    let w = if f.a.nrows() == 0 { 0.0 } else { numerical_radius(&f.a).map_err(to_js)? };
    json(&serde_json::json!({ "fundamental": f, "numerical_radius": w }))
}

/// Toral verdicts on the bidisc and distinguished verdicts on Γ.
#[wasm_bindgen]
pub fn classify_polynomial(poly_json: &str, grid: usize, tol: f64) -> Result<String, JsValue> {
    let p = parse_poly(poly_json).map_err(to_js)?;
    json(&serde_json::json!({
        "polynomial": p.to_string(),
        "bidisc": classify_bidisc(&p, grid, tol),
        "gamma": classify_gamma(&p, grid, tol),
    }))
}
