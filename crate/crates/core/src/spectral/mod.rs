//! Numerical side: `h(P) + V` on a periodic box as a matrix-free operator,
//! ground energies of localized operators, the essential-spectrum bottom,
//! a brute-force edge detector, and norm checks of the position-momentum
//! limit properties.
//!
//! The box is `[−L, L)^d` with `n` points per axis, `x_j = −L + jΔx`,
//! `Δx = 2L/n`. Momenta are `k = (π/L)m` with `m ∈ [−n/2, n/2)`, stored in FFT
//! order. The FFT is unitary, so `h(P) = F⁻¹ M_h F` is exactly diagonal.

mod checks;
mod dense;
mod edge;
mod essential;
mod grid;
mod lanczos;
mod operator;

pub use checks::{
    commutator_norm_sp, default_dispersion_radii, default_test_vectors, form_bound_check,
    interval_structure_check, translation_defect, two_body_quotient_check, validate_dispersion,
    validate_symbol, DispersionCheck, FormBound, FormBoundReport, IntervalCheck, QuotientCheck,
    NORM_ITERATIONS,
};
pub use dense::{dense_eigenvalues, dense_matrix, DenseOperator, MAX_DENSE};
pub use edge::{brute_force_edge, counting_function, EdgeEstimate, EdgeOptions};
pub use essential::{
    essential_spectrum_bottom, essential_spectrum_over, fmt_float, refinement_check,
    RefinementCheck, SpectralReport, SpectralRow,
};
pub use grid::{Grid, GridFft, MAX_POINTS};
pub use lanczos::{ground_energy, lanczos_smallest, GroundState, LanczosOptions};
pub use operator::{
    discretize, discretize_with, operator_norm_estimate, seeded_vector, DiscretizedOperator,
    GridOperator, LinearOperator, QPProduct,
};
