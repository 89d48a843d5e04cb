//! Parameter sweeps: Gaussian cost landscapes, worst-case prior curves,
//! Krylov order/penalty tables and a three-filter comparison.

use crate::cost::{self, fqpe_plan, fqpe_plan_with_depth, gaussian_fqpe_plan, DepthUnit, PriorEstimates};
use crate::error::{invalid, Error, Result};
use crate::filter::design::{chebyshev_coefficients, design_gaussian_trig, gaussian_trig_series, verify_grid};
use crate::filter::{filtered_state_report, normalize_filter, Basis, FilterReport, FilterSeries};
use crate::krylov::{build_krylov, krylov_filter, solve_modified_ksd, DEFAULT_THRESHOLD};
use crate::model::SpectralModel;
use serde::{Deserialize, Serialize};

/// Failure probability used for plans inside sweeps. Relative costs do not depend on it.
pub const SWEEP_DELTA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRange {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl SweepRange {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let r = SweepRange { lo, hi, n };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || !self.lo.is_finite() || !self.hi.is_finite() {
            return invalid("sweep range needs at least one finite point");
        }
        if self.n > 1 && !(self.hi > self.lo) {
            return invalid(format!("sweep range needs lo < hi, got [{}, {}]", self.lo, self.hi));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n).map(|k| self.lo + (self.hi - self.lo) * k as f64 / (self.n - 1) as f64).collect()
    }
}

pub const DEFAULT_BIAS: SweepRange = SweepRange { lo: -1.5, hi: 1.5, n: 61 };
pub const DEFAULT_WIDTH: SweepRange = SweepRange { lo: 0.3, hi: 3.0, n: 41 };

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandscapeCell {
    /// (tilde_E0 - E0) / gap.
    pub bias: f64,
    /// (tilde_E1 - tilde_E0) / gap.
    pub width: f64,
    pub relative_cost: Option<f64>,
    pub order: Option<usize>,
    pub p_f: Option<f64>,
    pub overlap: Option<f64>,
    /// Why the cell has no cost (filter vanishing at E0, design failure).
    pub invalid: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandscapeGrid {
    pub eps_over_gap: f64,
    pub basis: Basis,
    pub bias: Vec<f64>,
    pub width: Vec<f64>,
    /// Row-major over width, then bias: index = i_width * bias.len() + i_bias.
    pub cells: Vec<LandscapeCell>,
}

impl LandscapeGrid {
    pub fn cell(&self, i_bias: usize, i_width: usize) -> &LandscapeCell {
        &self.cells[i_width * self.bias.len() + i_bias]
    }

    pub fn minimum(&self) -> Option<&LandscapeCell> {
        self.cells
            .iter()
            .filter(|c| c.relative_cost.is_some())
            .min_by(|a, b| a.relative_cost.unwrap().total_cmp(&b.relative_cost.unwrap()))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["bias", "width", "relative_cost", "N", "p_f", "overlap", "invalid"]).map_err(csv_err)?;
        for c in &self.cells {
            w.write_record([
                fmt(c.bias),
                fmt(c.width),
                opt(c.relative_cost),
                c.order.map(|n| n.to_string()).unwrap_or_default(),
                opt(c.p_f),
                opt(c.overlap),
                c.invalid.clone().unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
        finish(w)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Invalid(format!("csv: {e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Invalid(e.to_string()))
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

/// One landscape cell; eps' is 0 in the filter width, the width axis is the filter width itself.
pub fn landscape_cell(
    model: &SpectralModel,
    epsilon: f64,
    bias: f64,
    width: f64,
    basis: Basis,
    eps_he: Option<f64>,
) -> LandscapeCell {
    let gap = model.gap();
    let e0 = model.ground_energy();
    let t0 = e0 + bias * gap;
    let t1 = t0 + width * gap;
    let res = PriorEstimates::new(t0, t1, 0.0).and_then(|p| gaussian_fqpe_plan(model, &p, epsilon, SWEEP_DELTA, basis, eps_he));
    match res {
        Ok(p) => LandscapeCell {
            bias,
            width,
            relative_cost: Some(p.relative_cost),
            order: p.filter_order,
            p_f: Some(p.p_f),
            overlap: Some(p.overlap_f0_sq),
            invalid: None,
        },
        Err(e) => LandscapeCell { bias, width, relative_cost: None, order: None, p_f: None, overlap: None, invalid: Some(e.to_string()) },
    }
}

pub fn sweep_gaussian(
    model: &SpectralModel,
    eps_over_gap: f64,
    bias: SweepRange,
    width: SweepRange,
    basis: Basis,
    eps_he: Option<f64>,
) -> Result<LandscapeGrid> {
    bias.validate()?;
    width.validate()?;
    if !(eps_over_gap > 0.0 && eps_over_gap < 1.0) {
        return invalid(format!("eps/gap must lie in (0, 1), got {eps_over_gap}"));
    }
    if !(model.gap().is_finite()) {
        return invalid("landscape needs a model with at least two levels");
    }
    if !(width.lo > 0.0) {
        return invalid("filter widths must be positive");
    }
    if basis == Basis::Chebyshev && eps_he.is_none() {
        return invalid("Chebyshev landscapes need eps_HE");
    }
    let epsilon = eps_over_gap * model.gap();
    let (b, w) = (bias.points(), width.points());
    let coords: Vec<(f64, f64)> = w.iter().flat_map(|&wi| b.iter().map(move |&bi| (bi, wi))).collect();
    let cells = crate::par::map(&coords, |&(bi, wi)| landscape_cell(model, epsilon, bi, wi, basis, eps_he));
    Ok(LandscapeGrid { eps_over_gap, basis, bias: b, width: w, cells })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCaseCurve {
    pub eps_over_gap: f64,
    pub eps_prime: Vec<f64>,
    pub worst_cost: Vec<f64>,
    pub cells_in_box: Vec<usize>,
    /// (bias, width) of the worst cell per eps'.
    pub worst_cell: Vec<(f64, f64)>,
}

impl WorstCaseCurve {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["eps_prime", "worst_cost", "cells_in_box", "worst_bias", "worst_width"]).map_err(csv_err)?;
        for i in 0..self.eps_prime.len() {
            w.write_record([
                fmt(self.eps_prime[i]),
                fmt(self.worst_cost[i]),
                self.cells_in_box[i].to_string(),
                fmt(self.worst_cell[i].0),
                fmt(self.worst_cell[i].1),
            ])
            .map_err(csv_err)?;
        }
        finish(w)
    }
}

/// Cells with |tilde_E0 - E0| <= eps' gap and |tilde_E1 - E1| <= eps' gap, i.e.
/// |bias| <= eps' and |bias + width - 1| <= eps'. Invalid cells count as infinite cost.
pub fn sweep_worst_case(grid: &LandscapeGrid, model: &SpectralModel, eps_prime: &[f64]) -> Result<WorstCaseCurve> {
    let _ = model.gap();
    let tol = 1e-12;
    let mut worst_cost = Vec::new();
    let mut cells_in_box = Vec::new();
    let mut worst_cell = Vec::new();
    for &ep in eps_prime {
        if !(ep >= 0.0) {
            return invalid(format!("eps' must be non-negative, got {ep}"));
        }
        let inside: Vec<&LandscapeCell> = grid
            .cells
            .iter()
            .filter(|c| c.bias.abs() <= ep + tol && (c.bias + c.width - 1.0).abs() <= ep + tol)
            .collect();
        if inside.is_empty() {
            return invalid(format!(
                "no grid cell inside the eps' = {ep} box; refine the grid so that some cell has |bias| <= {ep} and \
                 |bias + width - 1| <= {ep} (bias and width steps of at most {ep}, with width = 1 - bias reachable)"
            ));
        }
        let (mut best, mut at) = (f64::NEG_INFINITY, (0.0, 0.0));
        for c in &inside {
            let v = c.relative_cost.unwrap_or(f64::INFINITY);
            if v > best {
                best = v;
                at = (c.bias, c.width);
            }
        }
        worst_cost.push(best);
        cells_in_box.push(inside.len());
        worst_cell.push(at);
    }
    Ok(WorstCaseCurve { eps_over_gap: grid.eps_over_gap, eps_prime: eps_prime.to_vec(), worst_cost, cells_in_box, worst_cell })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LambdaChoice {
    Zero,
    /// lambda* = N eps.
    Star,
    Value(f64),
}

impl LambdaChoice {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "zero" | "0" => Ok(LambdaChoice::Zero),
            "star" => Ok(LambdaChoice::Star),
            t => t
                .parse::<f64>()
                .ok()
                .filter(|v| *v >= 0.0)
                .map(LambdaChoice::Value)
                .ok_or_else(|| Error::Invalid(format!("lambda must be 'zero', 'star' or a non-negative number, got '{t}'"))),
        }
    }

    pub fn value(&self, n: usize, epsilon: f64) -> f64 {
        match self {
            LambdaChoice::Zero => 0.0,
            LambdaChoice::Star => n as f64 * epsilon,
            LambdaChoice::Value(v) => *v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KrylovRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub lambda: f64,
    /// Rayleigh quotient of the (penalized) solution minus E0.
    pub e0_err: f64,
    /// Second Krylov eigenvalue of the unpenalized pencil minus E1.
    pub e1_err: Option<f64>,
    pub overlap: f64,
    pub p_f: f64,
    pub rel_cost: Option<f64>,
    pub f_at_e0_sq: f64,
    pub kappa: f64,
    pub retained_rank: usize,
}

pub fn krylov_rows_to_csv(rows: &[KrylovRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["N", "lambda", "E0_err", "E1_err", "overlap", "p_f", "rel_cost", "f_e0_sq", "kappa", "rank"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            fmt(r.lambda),
            fmt(r.e0_err),
            opt(r.e1_err),
            fmt(r.overlap),
            fmt(r.p_f),
            opt(r.rel_cost),
            fmt(r.f_at_e0_sq),
            fmt(r.kappa),
            r.retained_rank.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// Relative FQPE cost of a filter of order `order`; None when the ground state is rejected.
pub fn plan_relative_cost(
    model: &SpectralModel,
    report: &FilterReport,
    basis: Basis,
    order: usize,
    epsilon: f64,
    eps_he: Option<f64>,
) -> Result<Option<f64>> {
    if report.ground_rejected || report.f_at_e0_sq == 0.0 {
        return Ok(None);
    }
    let d0 = cost::optimal_delta0();
    let plan = match basis {
        Basis::Trig => fqpe_plan(model, report, order as f64, epsilon, SWEEP_DELTA, d0)?,
        Basis::Chebyshev => {
            let h = eps_he.ok_or_else(|| Error::Invalid("Chebyshev Krylov costs need eps_HE".into()))?;
            let d_qpe = cost::poly_qpe_depth(epsilon, h)?;
            fqpe_plan_with_depth(model, report, order as f64, d_qpe, DepthUnit::QubitizationQueries, epsilon, SWEEP_DELTA, d0)?
        }
    };
    Ok(Some(plan.relative_cost))
}

#[allow(clippy::too_many_arguments)]
pub fn sweep_krylov(
    model: &SpectralModel,
    basis: Basis,
    n_list: &[usize],
    lambdas: &[LambdaChoice],
    eps_over_gap: f64,
    threshold: f64,
    eps_he: Option<f64>,
) -> Result<Vec<KrylovRow>> {
    if n_list.is_empty() || lambdas.is_empty() {
        return invalid("need at least one N and one lambda");
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("N list must be strictly ascending");
    }
    if !(eps_over_gap > 0.0 && eps_over_gap < 1.0) || !model.gap().is_finite() {
        return invalid("need 0 < eps/gap < 1 and a model with a finite gap");
    }
    let epsilon = eps_over_gap * model.gap();
    let per_n = crate::par::map(n_list, |&n| -> Result<Vec<KrylovRow>> {
        let pair = build_krylov(model, basis, n)?;
        let plain = solve_modified_ksd(&pair, 0.0, threshold)?;
        let e1_err = match (plain.krylov_energies.get(1), model.energies().get(1)) {
            (Some(k), Some(e)) => Some(k - e),
            _ => None,
        };
        lambdas
            .iter()
            .map(|choice| {
                let lam = choice.value(n, epsilon);
                let sol = if lam == 0.0 { plain.clone() } else { solve_modified_ksd(&pair, lam, threshold)? };
                let f = krylov_filter(&sol, &pair)?;
                let r = filtered_state_report(model, &f);
                Ok(KrylovRow {
                    n,
                    lambda: lam,
                    e0_err: sol.ground_energy - model.ground_energy(),
                    e1_err,
                    overlap: r.overlap_f0_sq,
                    p_f: r.p_f,
                    rel_cost: plan_relative_cost(model, &r, basis, n, epsilon, eps_he)?,
                    f_at_e0_sq: r.f_at_e0_sq,
                    kappa: sol.condition_number,
                    retained_rank: sol.retained_rank,
                })
            })
            .collect()
    });
    let mut rows = Vec::new();
    for r in per_n {
        rows.extend(r?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparedFilter {
    pub name: String,
    pub lambda: Option<f64>,
    /// Fitted Gaussian sigma (Gaussian entry only).
    pub sigma: Option<f64>,
    pub series: FilterSeries,
    /// |f(x)| on the comparison grid.
    pub curve: Vec<f64>,
    /// w_i |f(E_i)|^2 / p_f, sums to 1.
    pub filtered_weights: Vec<f64>,
    pub report: FilterReport,
    pub rel_cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterComparison {
    #[serde(rename = "N")]
    pub n: usize,
    pub basis: Basis,
    pub eps_over_gap: f64,
    pub krylov_ground_energy: f64,
    pub grid: Vec<f64>,
    pub energies: Vec<f64>,
    pub weights: Vec<f64>,
    pub filters: Vec<ComparedFilter>,
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Grid indices [lo, hi] of the lobe of `y` containing index `start`.
fn main_lobe(y: &[f64], start: usize) -> (usize, usize, usize) {
    let mut peak = start;
    loop {
        let l = peak > 0 && y[peak - 1] > y[peak];
        let r = peak + 1 < y.len() && y[peak + 1] > y[peak];
        if l && (!r || y[peak - 1] >= y[peak + 1]) {
            peak -= 1;
        } else if r {
            peak += 1;
        } else {
            break;
        }
    }
    let mut lo = peak;
    while lo > 0 && y[lo - 1] <= y[lo] {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < y.len() && y[hi + 1] <= y[hi] {
        hi += 1;
    }
    (lo, peak, hi)
}

/// Least-squares sigma of exp(-(x - c)^2 / (2 sigma^2)) against the peak-normalized lobe.
pub fn fit_gaussian_sigma(grid: &[f64], y: &[f64], center: f64) -> Result<f64> {
    let start = grid.iter().enumerate().min_by(|a, b| (a.1 - center).abs().total_cmp(&(b.1 - center).abs())).map(|p| p.0).unwrap_or(0);
    let (lo, peak, hi) = main_lobe(y, start);
    let top = y[peak];
    if !(top > 0.0) || hi <= lo {
        return invalid("filter has no main lobe to fit");
    }
    let xs = &grid[lo..=hi];
    let ys: Vec<f64> = y[lo..=hi].iter().map(|v| v / top).collect();
    let span = (grid[hi] - grid[lo]).max(grid[1] - grid[0]);
    let sse = |s: f64| -> f64 {
        xs.iter().zip(&ys).map(|(&x, &t)| {
            let d = (x - center) / s;
            let r = (-0.5 * d * d).exp() - t;
            r * r
        }).sum()
    };
    Ok(golden_min(sse, span * 1e-3, span * 2.0, 120))
}

fn compared(
    name: &str,
    lambda: Option<f64>,
    sigma: Option<f64>,
    f: FilterSeries,
    model: &SpectralModel,
    grid: &[f64],
    rel_cost: Option<f64>,
) -> ComparedFilter {
    let report = filtered_state_report(model, &f);
    let filtered_weights = model
        .energies()
        .iter()
        .zip(model.overlaps_sq())
        .map(|(&e, &w)| if report.p_f > 0.0 { w * f.eval(e).norm_sqr() / report.p_f } else { 0.0 })
        .collect();
    ComparedFilter {
        name: name.into(),
        lambda,
        sigma,
        curve: grid.iter().map(|&x| f.eval(x).norm()).collect(),
        series: f,
        filtered_weights,
        report,
        rel_cost,
    }
}

/// Krylov (lambda = 0), modified Krylov (lambda* = N eps) and a Gaussian of the same order whose
/// width is fitted to the modified-Krylov main lobe, centered at the Krylov ground energy.
pub fn filter_comparison(
    model: &SpectralModel,
    basis: Basis,
    n: usize,
    eps_over_gap: f64,
    threshold: f64,
    eps_he: Option<f64>,
) -> Result<FilterComparison> {
    if n < 2 {
        return invalid("comparison needs N >= 2");
    }
    if !(eps_over_gap > 0.0 && eps_over_gap < 1.0) || !model.gap().is_finite() {
        return invalid("need 0 < eps/gap < 1 and a model with a finite gap");
    }
    let epsilon = eps_over_gap * model.gap();
    let grid = verify_grid();
    let pair = build_krylov(model, basis, n)?;
    let plain = solve_modified_ksd(&pair, 0.0, threshold)?;
    let lam = n as f64 * epsilon;
    let modified = solve_modified_ksd(&pair, lam, threshold)?;
    let f0 = krylov_filter(&plain, &pair)?;
    let f1 = krylov_filter(&modified, &pair)?;
    let center = plain.krylov_energies[0].clamp(-1.0, 1.0);
    let lobe: Vec<f64> = grid.iter().map(|&x| f1.eval(x).norm()).collect();
    let sigma = fit_gaussian_sigma(&grid, &lobe, center)?;
    let g = match basis {
        Basis::Trig => gaussian_trig_series(0.0, center, sigma, n / 2)?,
        Basis::Chebyshev => {
            let c = chebyshev_coefficients(|x| (-0.5 * ((x - center) / sigma).powi(2)).exp(), n, 4 * n + 64);
            FilterSeries::from_real(Basis::Chebyshev, &c, 0.0)?
        }
    };
    let g = if g.sup_norm() > 1.0 { normalize_filter(&g)? } else { g };
    let mut filters = Vec::new();
    for (name, l, s, f) in [("krylov", Some(0.0), None, f0), ("modified_krylov", Some(lam), None, f1), ("gaussian", None, Some(sigma), g)] {
        let r = filtered_state_report(model, &f);
        let rc = plan_relative_cost(model, &r, basis, n, epsilon, eps_he)?;
        filters.push(compared(name, l, s, f, model, &grid, rc));
    }
    Ok(FilterComparison {
        n,
        basis,
        eps_over_gap,
        krylov_ground_energy: plain.krylov_energies[0],
        grid,
        energies: model.energies().to_vec(),
        weights: model.overlaps_sq().to_vec(),
        filters,
    })
}

pub fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

/// A filtered-state report to check the sampled FQPE success rate against.
#[derive(Debug, Clone, Serialize)]
pub struct McScenario {
    pub name: &'static str,
    pub model: SpectralModel,
    pub report: FilterReport,
    pub delta: f64,
}

fn gaussian_report(model: &SpectralModel, eps_over_gap: f64, eps_prime: f64) -> Result<FilterReport> {
    let pr = PriorEstimates::exact(model, eps_prime)?;
    let eps_g = cost::gaussian_epsilon_g(eps_over_gap * model.gap(), model.gap())?;
    let d = design_gaussian_trig(pr.tilde_e0, pr.tilde_e0, pr.tilde_e1, pr.eps_prime, eps_g)?;
    Ok(filtered_state_report(model, &d.series))
}

/// Two-level toy, a gapped synthetic spectrum with a Gaussian filter, and the
/// 7-site Hubbard chain with a Gaussian filter at eps = 1e-3 gap.
pub fn shipped_mc_scenarios() -> Result<Vec<McScenario>> {
    use crate::filter::report::report_from_values;
    use crate::model::{hubbard_neel_model, synthetic_model, HubbardSpec, Lattice, NeelPattern, ScalePolicy, Spin};
    let two = synthetic_model(vec![-0.5, 0.5], vec![0.04, 0.96])?;
    let two_report = report_from_values(two.overlaps_sq(), &[1.0, 0.01]);
    let mut e = vec![-0.6, -0.5];
    let mut w = vec![0.02, 0.08];
    for k in 0..30 {
        e.push(-0.45 + 0.045 * k as f64);
        w.push(0.9 / 30.0);
    }
    let synth = synthetic_model(e, w)?;
    let synth_report = gaussian_report(&synth, 1e-2, 0.1)?;
    let spec = HubbardSpec::new(Lattice::Chain { length: 7 }, 1.0, 10.0, 2, 2)?;
    let hub = hubbard_neel_model(&spec, NeelPattern::LeftPackedAlternating, Spin::Up, ScalePolicy::default())?;
    let hub_report = gaussian_report(&hub, 1e-3, 0.0)?;
    Ok(vec![
        McScenario { name: "two_level", model: two, report: two_report, delta: 0.1 },
        McScenario { name: "synthetic_gaussian", model: synth, report: synth_report, delta: 0.05 },
        McScenario { name: "hubbard_chain7_gaussian", model: hub, report: hub_report, delta: 0.1 },
    ])
}
