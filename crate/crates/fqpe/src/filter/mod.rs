//! Filter functions as finite Chebyshev or trigonometric series, their
//! classical designs, and filtered-state / robustness diagnostics.

pub mod design;
pub mod report;
pub mod series;

pub use design::{
    design_cheb_minimax_poly, design_cheb_minimax_trig, design_gaussian_cheb, design_gaussian_trig,
    design_kaiser_trig, kaiser_with_beta, minimax_poly_eps, minimax_trig_eps, GaussianDesign, GaussianTarget,
    MinimaxDesign,
};
pub use report::{
    filtered_state_report, jacobi_anger_truncation, lipschitz_bounds, perturbation_experiment, projector_kappa_bound,
    FilterReport, LipschitzBounds, RobustnessReport,
};
pub use series::{normalize_filter, Basis, FilterSeries};
