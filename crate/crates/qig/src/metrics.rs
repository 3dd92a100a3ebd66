//! Model-agnostic metric engines and brute-force distance oracles.
//!
//! Two independent routes exist for each metric:
//! - distances between finitely separated states ([`bures_distance_sq`],
//!   [`sjoqvist_distance_sq`]), used as quadratic-form oracles;
//! - tensor engines at a point: the eigenbasis sum over `∂ρ` matrix elements
//!   ([`bures_metric_hubner`]), the thermal-state form in terms of `H` and
//!   `∂H/∂h` ([`bures_metric_thermal`]), and the interferometric engine
//!   built from probability differentials plus perturbation-theory
//!   eigenvector derivatives ([`sjoqvist_metric`]).
//!
//! All engines report the classical (Fisher-Rao) / nonclassical split per
//! component.

use serde::Serialize;

use crate::hermitian::{eig, spectral_fn, HermitianOperator, Matrix, SpectralDecomposition};
use crate::models::{thermal_state, ModelSpec, ThermalState};
use crate::{Error, Result};

/// Degeneracy threshold for the metric engines, relative to
/// `max(1, spectral radius)`.
pub const METRIC_DEGENERACY_TOL: f64 = 1e-10;

/// Kernel threshold for the eigenbasis sum: terms with `λ_i + λ_j` below
/// this are dropped (matrix elements between kernel states vanish
/// identically, so the term carries no information).
pub const KERNEL_TOL: f64 = 1e-14;

/// Default step for finite-difference `∂ρ` stencils.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Distance-squared values in `[-NEGATIVE_CLAMP, 0)` are numerical noise
/// near coincident states and clamp to zero.
const NEGATIVE_CLAMP: f64 = 1e-12;

const DENSITY_TRACE_TOL: f64 = 1e-10;
const DENSITY_PSD_TOL: f64 = -1e-12;
const TRACELESS_TOL: f64 = 1e-10;
const IDEMPOTENCY_TOL: f64 = 1e-8;

/// One metric-tensor component with its classical/nonclassical split;
/// the component value is exactly `classical + nonclassical`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricComponent {
    pub classical: f64,
    pub nonclassical: f64,
}

impl MetricComponent {
    pub fn classical_only(value: f64) -> Self {
        MetricComponent {
            classical: value,
            nonclassical: 0.0,
        }
    }

    pub fn total(self) -> f64 {
        self.classical + self.nonclassical
    }
}

/// Symmetric 2x2 metric tensor over `(β, h)` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTensor {
    coords: (String, String),
    pub bb: MetricComponent,
    pub bh: MetricComponent,
    pub hh: MetricComponent,
}

impl MetricTensor {
    pub fn new(
        h_label: &str,
        bb: MetricComponent,
        bh: MetricComponent,
        hh: MetricComponent,
    ) -> Self {
        MetricTensor {
            coords: ("beta".into(), h_label.into()),
            bb,
            bh,
            hh,
        }
    }

    pub fn coords(&self) -> (&str, &str) {
        (&self.coords.0, &self.coords.1)
    }

    pub fn g_bb(&self) -> f64 {
        self.bb.total()
    }

    pub fn g_bh(&self) -> f64 {
        self.bh.total()
    }

    pub fn g_hh(&self) -> f64 {
        self.hh.total()
    }

    /// `g_bb dβ² + 2 g_bh dβ dh + g_hh dh²`.
    pub fn quadratic_form(&self, dbeta: f64, dh: f64) -> f64 {
        self.g_bb() * dbeta * dbeta + 2.0 * self.g_bh() * dbeta * dh + self.g_hh() * dh * dh
    }

    /// Eigenvalues of the 2x2 tensor, ascending.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let half_trace = (self.g_bb() + self.g_hh()) / 2.0;
        let det = self.g_bb() * self.g_hh() - self.g_bh() * self.g_bh();
        let disc = (half_trace * half_trace - det).max(0.0).sqrt();
        (half_trace - disc, half_trace + disc)
    }

    /// The Fisher-Rao part: classical splits only.
    pub fn classical_part(&self) -> MetricTensor {
        MetricTensor {
            coords: self.coords.clone(),
            bb: MetricComponent::classical_only(self.bb.classical),
            bh: MetricComponent::classical_only(self.bh.classical),
            hh: MetricComponent::classical_only(self.hh.classical),
        }
    }

    /// Largest absolute componentwise difference, totals and splits included.
    pub fn max_abs_diff(&self, other: &MetricTensor) -> f64 {
        [
            self.g_bb() - other.g_bb(),
            self.g_bh() - other.g_bh(),
            self.g_hh() - other.g_hh(),
            self.bb.classical - other.bb.classical,
            self.bh.classical - other.bh.classical,
            self.hh.classical - other.hh.classical,
            self.bb.nonclassical - other.bb.nonclassical,
            self.bh.nonclassical - other.bh.nonclassical,
            self.hh.nonclassical - other.hh.nonclassical,
        ]
        .iter()
        .map(|d| d.abs())
        .fold(0.0, f64::max)
    }
}

/// Coordinate direction on the `(β, h)` manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    Beta,
    H,
}

/// First-order data of a thermal state along one coordinate direction:
/// probability differentials and eigenvector-overlap derivatives
/// `⟨n_m|∂n_k⟩` (zero diagonal, skew-Hermitian).
#[derive(Debug, Clone)]
pub struct TangentPerturbation {
    dp: Vec<f64>,
    overlaps: Matrix,
}

impl TangentPerturbation {
    /// `∂_β`: probabilities move as `∂_β p_n = p_n(⟨H⟩ - E_n)`; the
    /// eigenbasis of a thermal family depends only on `h`, so the overlap
    /// matrix is identically zero. It still participates in the bilinear
    /// forms so a β-dependent basis would be handled unchanged.
    pub fn beta_direction(state: &ThermalState) -> TangentPerturbation {
        let p = state.probabilities();
        let e = state.energies();
        let mean_energy: f64 = p.iter().zip(e).map(|(&pi, &ei)| pi * ei).sum();
        let dp = p
            .iter()
            .zip(e)
            .map(|(&pi, &ei)| pi * (mean_energy - ei))
            .collect();
        TangentPerturbation {
            dp,
            overlaps: Matrix::zeros(state.dim()),
        }
    }

    /// `∂_h`: probabilities move as `∂_h p_n = β p_n(⟨(∂_h H)_d⟩ - ∂_h E_n)`
    /// and eigenvectors by first-order perturbation theory,
    /// `⟨n_m|∂_h n_k⟩ = ⟨m|∂_h H|k⟩ / (E_k - E_m)` for `m ≠ k`.
    pub fn h_direction(
        state: &ThermalState,
        dh: &HermitianOperator,
    ) -> Result<TangentPerturbation> {
        let n = state.dim();
        if dh.dim() != n {
            return Err(Error::ShapeMismatch(n, dh.dim()));
        }
        let w = state.basis().to_eigenbasis(dh.matrix())?;
        let p = state.probabilities();
        let e = state.energies();
        let de: Vec<f64> = (0..n).map(|k| w.get(k, k).re).collect();
        let mean_de: f64 = p.iter().zip(&de).map(|(&pi, &di)| pi * di).sum();
        let beta = state.beta();
        let dp = p
            .iter()
            .zip(&de)
            .map(|(&pi, &di)| beta * pi * (mean_de - di))
            .collect();

        let scale = state.basis().spectral_radius().max(1.0);
        let gap_threshold = METRIC_DEGENERACY_TOL * scale;
        let element_tol = 1e-12 * dh.matrix().max_norm().max(1.0);
        let mut overlaps = Matrix::zeros(n);
        for m in 0..n {
            for k in 0..n {
                if m == k {
                    continue;
                }
                let gap = e[k] - e[m];
                let element = w.get(m, k);
                if gap.abs() < gap_threshold {
                    if element.norm() > element_tol {
                        return Err(Error::Degenerate {
                            gap: gap.abs(),
                            threshold: gap_threshold,
                        });
                    }
                    // Removable singularity: the coupling vanishes on the
                    // degenerate pair, so the term contributes nothing.
                    log::warn!(
                        "skipping degenerate pair ({m}, {k}) with vanishing coupling (gap {gap:e})"
                    );
                    continue;
                }
                overlaps.set(m, k, element / gap);
            }
        }
        Ok(TangentPerturbation { dp, overlaps })
    }

    /// Probability differentials per unit coordinate.
    pub fn dp(&self) -> &[f64] {
        &self.dp
    }

    /// `⟨n_m|∂n_k⟩` at `(m, k)`.
    pub fn overlaps(&self) -> &Matrix {
        &self.overlaps
    }
}

fn validate_density(name: &str, rho: &HermitianOperator) -> Result<SpectralDecomposition> {
    let trace = rho.trace_real();
    if (trace - 1.0).abs() > DENSITY_TRACE_TOL {
        return Err(Error::Contract(format!(
            "{name} is not a density matrix: trace {trace} is not 1"
        )));
    }
    let spec = eig(rho)?;
    let min = spec.eigenvalues()[0];
    if min < DENSITY_PSD_TOL {
        return Err(Error::Contract(format!(
            "{name} is not a density matrix: min eigenvalue {min:e}"
        )));
    }
    Ok(spec)
}

fn clamp_distance(d2: f64) -> f64 {
    if (-NEGATIVE_CLAMP..0.0).contains(&d2) {
        0.0
    } else {
        d2
    }
}

/// Squared Bures distance `2 - 2 tr[(ρ^{1/2} σ ρ^{1/2})^{1/2}]` between two
/// density matrices.
pub fn bures_distance_sq(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::ShapeMismatch(rho.dim(), sigma.dim()));
    }
    validate_density("rho", rho)?;
    validate_density("sigma", sigma)?;

    let sqrt_rho = spectral_fn(rho, |x| x.max(0.0).sqrt())?;
    let inner = sqrt_rho
        .matrix()
        .mul(sigma.matrix())?
        .mul(sqrt_rho.matrix())?;
    let inner = HermitianOperator::from_trusted(inner);
    let fidelity_root: f64 = eig(&inner)?
        .eigenvalues()
        .iter()
        .map(|&x| x.max(0.0).sqrt())
        .sum();
    Ok(clamp_distance(2.0 - 2.0 * fidelity_root))
}

/// Squared interferometric distance
/// `2 - 2 Σ_k √(p_k q_k) |⟨n_k|m_k⟩|` between two nondegenerate states,
/// eigenvectors paired by ascending-energy rank. The absolute value makes
/// the expression gauge-invariant.
pub fn sjoqvist_distance_sq(a: &ThermalState, b: &ThermalState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch(a.dim(), b.dim()));
    }
    for state in [a, b] {
        let scale = state.basis().spectral_radius().max(1.0);
        let gap = state.basis().min_gap();
        if gap < METRIC_DEGENERACY_TOL * scale {
            return Err(Error::Degenerate {
                gap,
                threshold: METRIC_DEGENERACY_TOL * scale,
            });
        }
    }
    let overlap_sum: f64 = (0..a.dim())
        .map(|k| {
            let amplitude = (a.probabilities()[k] * b.probabilities()[k]).sqrt();
            let overlap = a
                .basis()
                .eigenvectors()
                .column_dot(k, b.basis().eigenvectors(), k)
                .norm();
            amplitude * overlap
        })
        .sum();
    Ok(clamp_distance(2.0 - 2.0 * overlap_sum))
}

/// Bures tensor from the eigenbasis sum
/// `g_ab = (1/2) Σ_{i,j} Re[⟨i|∂_a ρ|j⟩⟨j|∂_b ρ|i⟩] / (λ_i + λ_j)`,
/// the symmetric bilinear extension of the quadratic form. `drho` holds the
/// `β`- and `h`-direction derivatives of `ρ`, which must be traceless
/// (densities stay normalized). The `i = j` sub-sum is the classical part.
pub fn bures_metric_hubner(
    rho_spec: &SpectralDecomposition,
    drho: [&HermitianOperator; 2],
    h_label: &str,
) -> Result<MetricTensor> {
    let n = rho_spec.dim();
    for (idx, d) in drho.iter().enumerate() {
        if d.dim() != n {
            return Err(Error::ShapeMismatch(n, d.dim()));
        }
        let trace = d.trace_real();
        if trace.abs() > TRACELESS_TOL {
            return Err(Error::Contract(format!(
                "drho[{idx}] is not traceless: trace {trace:e} (dρ must preserve tr ρ = 1)"
            )));
        }
    }

    let m_beta = rho_spec.to_eigenbasis(drho[0].matrix())?;
    let m_h = rho_spec.to_eigenbasis(drho[1].matrix())?;
    let lambda = rho_spec.eigenvalues();

    let component = |a: &Matrix, b: &Matrix| -> MetricComponent {
        let mut classical = 0.0;
        let mut nonclassical = 0.0;
        for i in 0..n {
            for j in 0..n {
                let weight = lambda[i] + lambda[j];
                if weight < KERNEL_TOL {
                    continue;
                }
                let term = 0.5 * (a.get(i, j) * b.get(j, i)).re / weight;
                if i == j {
                    classical += term;
                } else {
                    nonclassical += term;
                }
            }
        }
        MetricComponent {
            classical,
            nonclassical,
        }
    };

    Ok(MetricTensor::new(
        h_label,
        component(&m_beta, &m_beta),
        component(&m_beta, &m_h),
        component(&m_h, &m_h),
    ))
}

/// Bures tensor of a thermal family directly from `H` and `∂H/∂h`:
///
/// - `g_ββ = (1/4)(⟨H²⟩ - ⟨H⟩²)`
/// - `g_βh = (β/4)(⟨H (∂_h H)_d⟩ - ⟨H⟩⟨(∂_h H)_d⟩)`
/// - `g_hh = (β²/4)(⟨[(∂_h H)_d]²⟩ - ⟨(∂_h H)_d⟩²)`
///   `+ (1/2) Σ_{n≠m} |⟨n|∂_h H|m⟩/(E_n - E_m)|² (e^{-βE_n} - e^{-βE_m})² / [Z(e^{-βE_n} + e^{-βE_m})]`
///
/// with the `n ≠ m` sum recorded as the nonclassical part. Gibbs factors are
/// evaluated in max-shifted form, under which the `Z`-normalized ratio is
/// algebraically unchanged.
pub fn bures_metric_thermal(model: &ModelSpec, beta: f64, h: f64) -> Result<MetricTensor> {
    let state = thermal_state(model, beta, h)?;
    let dh_op = model.d_hamiltonian(h)?;
    let w = state.basis().to_eigenbasis(dh_op.matrix())?;

    let n = state.dim();
    let p = state.probabilities();
    let e = state.energies();
    let de: Vec<f64> = (0..n).map(|k| w.get(k, k).re).collect();

    let mean = |f: &dyn Fn(usize) -> f64| -> f64 { (0..n).map(|k| p[k] * f(k)).sum() };
    let mean_e = mean(&|k| e[k]);
    let mean_e2 = mean(&|k| e[k] * e[k]);
    let mean_de = mean(&|k| de[k]);
    let mean_de2 = mean(&|k| de[k] * de[k]);
    let mean_e_de = mean(&|k| e[k] * de[k]);

    let g_bb = 0.25 * (mean_e2 - mean_e * mean_e);
    let g_bh = 0.25 * beta * (mean_e_de - mean_e * mean_de);
    let g_hh_classical = 0.25 * beta * beta * (mean_de2 - mean_de * mean_de);

    // Shifted Gibbs factors: e^{-β E_n} = w_n e^{-β E_min}; the common factor
    // cancels between the numerator and the Z-normalized denominator.
    let e_min = e[0];
    let shifted: Vec<f64> = e.iter().map(|&en| (-beta * (en - e_min)).exp()).collect();
    let z_shifted: f64 = shifted.iter().sum();

    let scale = state.basis().spectral_radius().max(1.0);
    let gap_threshold = METRIC_DEGENERACY_TOL * scale;
    let element_tol = 1e-12 * dh_op.matrix().max_norm().max(1.0);

    let mut g_hh_nonclassical = 0.0;
    for row in 0..n {
        for col in 0..n {
            if row == col {
                continue;
            }
            let gap = e[row] - e[col];
            let element = w.get(row, col);
            if gap.abs() < gap_threshold {
                if element.norm() > element_tol {
                    return Err(Error::Degenerate {
                        gap: gap.abs(),
                        threshold: gap_threshold,
                    });
                }
                log::warn!(
                    "skipping degenerate pair ({row}, {col}) with vanishing coupling (gap {gap:e})"
                );
                continue;
            }
            let ratio = element.norm_sqr() / (gap * gap);
            let wn = shifted[row];
            let wm = shifted[col];
            g_hh_nonclassical += 0.5 * ratio * (wn - wm) * (wn - wm) / (z_shifted * (wn + wm));
        }
    }

    Ok(MetricTensor::new(
        model.h_name(),
        MetricComponent::classical_only(g_bb),
        MetricComponent::classical_only(g_bh),
        MetricComponent {
            classical: g_hh_classical,
            nonclassical: g_hh_nonclassical,
        },
    ))
}

/// Sjöqvist tensor of a thermal family: classical part
/// `(1/4) Σ_k ∂_a p_k ∂_b p_k / p_k`, nonclassical part
/// `Σ_k p_k Re⟨∂_a n_k|(I - |n_k⟩⟨n_k|)|∂_b n_k⟩` with eigenvector
/// derivatives from first-order perturbation theory.
pub fn sjoqvist_metric(model: &ModelSpec, beta: f64, h: f64) -> Result<MetricTensor> {
    let state = thermal_state(model, beta, h)?;
    let dh_op = model.d_hamiltonian(h)?;
    let tangent_beta = TangentPerturbation::beta_direction(&state);
    let tangent_h = TangentPerturbation::h_direction(&state, &dh_op)?;
    sjoqvist_from_tangents(model.h_name(), &state, &tangent_beta, &tangent_h)
}

/// Assembles the Sjöqvist tensor from precomputed tangent data; both the
/// β- and h-direction eigenvector terms go through the same bilinear form
/// (the β one vanishes for thermal families, but is evaluated, not assumed).
pub fn sjoqvist_from_tangents(
    h_label: &str,
    state: &ThermalState,
    tangent_beta: &TangentPerturbation,
    tangent_h: &TangentPerturbation,
) -> Result<MetricTensor> {
    let n = state.dim();
    let p = state.probabilities();

    let classical = |a: &TangentPerturbation, b: &TangentPerturbation| -> f64 {
        0.25 * (0..n)
            .map(|k| {
                if p[k] > 0.0 {
                    a.dp[k] * b.dp[k] / p[k]
                } else {
                    0.0
                }
            })
            .sum::<f64>()
    };

    // `|∂n_k⟩ = Σ_{m≠k} O[m,k] |n_m⟩` is already orthogonal to `|n_k⟩`, so
    // the projector acts as the identity on it:
    // Re⟨∂_a n_k|P_⊥|∂_b n_k⟩ = Σ_{m≠k} Re[conj(O_a[m,k]) O_b[m,k]].
    let nonclassical = |a: &TangentPerturbation, b: &TangentPerturbation| -> f64 {
        (0..n)
            .map(|k| {
                let inner: f64 = (0..n)
                    .filter(|&m| m != k)
                    .map(|m| (a.overlaps.get(m, k).conj() * b.overlaps.get(m, k)).re)
                    .sum();
                p[k] * inner
            })
            .sum()
    };

    let component = |a: &TangentPerturbation, b: &TangentPerturbation| MetricComponent {
        classical: classical(a, b),
        nonclassical: nonclassical(a, b),
    };

    Ok(MetricTensor::new(
        h_label,
        component(tangent_beta, tangent_beta),
        component(tangent_beta, tangent_h),
        component(tangent_h, tangent_h),
    ))
}

/// Fubini-Study value `tr[(∂ρ)²]` for a pure-state projector `ρ`.
pub fn fubini_study_metric(rho_pure: &HermitianOperator, drho: &HermitianOperator) -> Result<f64> {
    if rho_pure.dim() != drho.dim() {
        return Err(Error::ShapeMismatch(rho_pure.dim(), drho.dim()));
    }
    let trace = rho_pure.trace_real();
    if (trace - 1.0).abs() > IDEMPOTENCY_TOL {
        return Err(Error::Contract(format!(
            "pure-state projector must have unit trace, got {trace}"
        )));
    }
    let squared = rho_pure.matrix().mul(rho_pure.matrix())?;
    let idem = squared.sub(rho_pure.matrix())?.max_norm();
    if idem > IDEMPOTENCY_TOL {
        return Err(Error::Contract(format!(
            "state is not idempotent (‖ρ² - ρ‖ = {idem:e}); Fubini-Study needs a pure state"
        )));
    }
    Ok(drho.matrix().mul(drho.matrix())?.trace().re)
}

/// Central-difference `∂ρ/∂coord` with one Richardson extrapolation level
/// (steps `s` and `s/2`), symmetrized to exact Hermiticity.
pub fn finite_diff_drho(
    model: &ModelSpec,
    beta: f64,
    h: f64,
    which: Coord,
    step: f64,
) -> Result<HermitianOperator> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Config(format!(
            "fd step must be positive, got {step}"
        )));
    }
    let rho_at = |offset: f64| -> Result<Matrix> {
        let (b, hh) = match which {
            Coord::Beta => (beta + offset, h),
            Coord::H => (beta, h + offset),
        };
        Ok(thermal_state(model, b, hh)?.rho().matrix().clone())
    };
    let central =
        |s: f64| -> Result<Matrix> { Ok(rho_at(s)?.sub(&rho_at(-s)?)?.scale(1.0 / (2.0 * s))) };
    let coarse = central(step)?;
    let fine = central(step / 2.0)?;
    let extrapolated = fine.scale(4.0).sub(&coarse)?.scale(1.0 / 3.0);
    Ok(HermitianOperator::from_trusted(extrapolated))
}
