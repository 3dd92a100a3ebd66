//! Analytic metric tensors for the built-in models, plus the derived
//! discrepancy and zero-temperature limit values.
//!
//! These are the ground truth the general engines are tested against. All
//! three two-level families share one algebraic skeleton: with
//! `ν = √(a² + b²)` for `H = ±(ħ/2)(a σx + b σz)` (`b` the tunable
//! parameter) and `x = βħν/2`,
//!
//! ```text
//! g = (ħ²/16) sech²(x) · [[ν², βb], [βb, β²b²/ν²]]   (classical part)
//! g_hh^nc(Bures)    = (ħ²/16) sech²(x) · (4a²/ħ²ν⁴) · sinh²(x)
//! g_hh^nc(Sjöqvist) = (ħ²/16) sech²(x) · (4a²/ħ²ν⁴) · cosh²(x)
//! ```
//!
//! `sinh²` and `cosh²` overflow near `x ≈ 355`; past the guard the
//! expressions are evaluated in their algebraically reduced forms
//! `(a²/4ν⁴)·tanh²(x)` and `a²/4ν⁴`.

use crate::hermitian::{HermitianOperator, Matrix};
use crate::metrics::{MetricComponent, MetricTensor};
use crate::models::sigma_x;
use crate::models::sigma_z;
use crate::{Error, Result};

/// Above this argument `cosh²`/`sinh²` would overflow: `sech²` is treated
/// as 0 and the nonclassical parts switch to their reduced forms.
const SECH_OVERFLOW_GUARD: f64 = 350.0;

/// `1 - tanh²(x)` evaluated as `1/cosh²(x)`, avoiding the catastrophic
/// cancellation of the naive form at large `x`.
pub fn sech_sq(x: f64) -> f64 {
    if x.abs() > SECH_OVERFLOW_GUARD {
        0.0
    } else {
        let c = x.cosh();
        1.0 / (c * c)
    }
}

/// Closed-form tensors of one model at one parameter point, with the
/// derived nonclassical discrepancy and the `β → ∞` limit of `g_hh`.
#[derive(Debug, Clone)]
pub struct ClosedFormResult {
    pub model: String,
    pub tensor_bures: MetricTensor,
    pub tensor_sjoqvist: MetricTensor,
    /// `g_hh^nc(Sjöqvist) - g_hh^nc(Bures)`; the tensors differ only here.
    pub discrepancy_nc: f64,
    /// Common `β → ∞` limit of `g_hh` for both metrics.
    pub beta_inf_limit_hh: f64,
}

fn check_closed_form_inputs(beta: f64, hbar: f64) -> Result<()> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::Contract(format!(
            "closed forms require finite beta >= 0, got {beta}"
        )));
    }
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::Contract(format!(
            "closed forms require positive hbar, got {hbar}"
        )));
    }
    Ok(())
}

/// Shared two-level closed form; `a` multiplies `σx` (fixed), `b` multiplies
/// `σz` (tunable), and the sign of `H` drops out of every component.
fn two_level_closed_form(
    model: &str,
    h_label: &str,
    beta: f64,
    b: f64,
    a: f64,
    hbar: f64,
) -> Result<ClosedFormResult> {
    check_closed_form_inputs(beta, hbar)?;
    let nu_sq = a * a + b * b;
    if nu_sq == 0.0 {
        return Err(Error::Degenerate {
            gap: 0.0,
            threshold: f64::MIN_POSITIVE,
        });
    }
    let nu = nu_sq.sqrt();
    let x = beta * hbar * nu / 2.0;
    let s2 = sech_sq(x);
    let prefactor = hbar * hbar / 16.0 * s2;

    let bb = prefactor * nu_sq;
    let bh = prefactor * beta * b;
    let hh_classical = prefactor * beta * beta * b * b / nu_sq;

    // Nonclassical hh parts; reduced forms past the overflow guard.
    let nc_coeff = 4.0 * a * a / (hbar * hbar * nu_sq * nu_sq);
    let quarter = 0.25 * a * a / (nu_sq * nu_sq);
    let (nc_bures, nc_sjoqvist) = if x.abs() > SECH_OVERFLOW_GUARD {
        let t = x.tanh();
        (quarter * t * t, quarter)
    } else {
        let sinh = x.sinh();
        let cosh = x.cosh();
        (
            prefactor * nc_coeff * sinh * sinh,
            prefactor * nc_coeff * cosh * cosh,
        )
    };

    let discrepancy_nc = quarter * s2;
    let beta_inf_limit_hh = quarter;

    let tensor = |nc: f64| {
        MetricTensor::new(
            h_label,
            MetricComponent::classical_only(bb),
            MetricComponent::classical_only(bh),
            MetricComponent {
                classical: hh_classical,
                nonclassical: nc,
            },
        )
    };

    Ok(ClosedFormResult {
        model: model.into(),
        tensor_bures: tensor(nc_bures),
        tensor_sjoqvist: tensor(nc_sjoqvist),
        discrepancy_nc,
        beta_inf_limit_hh,
    })
}

/// Spin qubit in a z-field: both tensors equal
/// `(ħ²/16)[1 - tanh²(βħω/2)] [[ω², βω], [βω, β²]]` and the discrepancy
/// vanishes identically (the two metrics coincide for this model).
pub fn closed_form_spin_z(beta: f64, omega: f64, hbar: f64) -> Result<ClosedFormResult> {
    check_closed_form_inputs(beta, hbar)?;
    let x = beta * hbar * omega / 2.0;
    let s2 = sech_sq(x);
    let prefactor = hbar * hbar / 16.0 * s2;
    let tensor = MetricTensor::new(
        "omega",
        MetricComponent::classical_only(prefactor * omega * omega),
        MetricComponent::classical_only(prefactor * beta * omega),
        MetricComponent::classical_only(prefactor * beta * beta),
    );
    Ok(ClosedFormResult {
        model: "spin-z".into(),
        tensor_bures: tensor.clone(),
        tensor_sjoqvist: tensor,
        discrepancy_nc: 0.0,
        beta_inf_limit_hh: 0.0,
    })
}

/// Tilted-field spin qubit, `ω_x` fixed, `ω_z` tunable.
pub fn closed_form_spin_xz(
    beta: f64,
    omega_z: f64,
    omega_x: f64,
    hbar: f64,
) -> Result<ClosedFormResult> {
    two_level_closed_form("spin-xz", "omega_z", beta, omega_z, omega_x, hbar)
}

/// Superconducting flux qubit, `Δ` fixed, `ε` tunable.
pub fn closed_form_flux(beta: f64, eps: f64, delta: f64, hbar: f64) -> Result<ClosedFormResult> {
    two_level_closed_form("flux-qubit", "epsilon", beta, eps, delta, hbar)
}

/// Nonclassical discrepancy of the flux qubit,
/// `Δg^nc_εε = (1/4) Δ²/(Δ² + ε²)² [1 - tanh²(βħ√(ε² + Δ²)/2)]`:
/// nonnegative, decreasing in β, vanishing as β → ∞.
pub fn discrepancy_nc(beta: f64, eps: f64, delta: f64, hbar: f64) -> Result<f64> {
    check_closed_form_inputs(beta, hbar)?;
    let nu_sq = delta * delta + eps * eps;
    if nu_sq == 0.0 {
        return Err(Error::Degenerate {
            gap: 0.0,
            threshold: f64::MIN_POSITIVE,
        });
    }
    let x = beta * hbar * nu_sq.sqrt() / 2.0;
    Ok(0.25 * delta * delta / (nu_sq * nu_sq) * sech_sq(x))
}

/// Dispatches to the closed form matching a built-in model, pulling the
/// fixed parameters from the model itself. Errors for the generic model,
/// which has no closed form.
pub fn closed_form_for(
    model: &crate::models::ModelSpec,
    beta: f64,
    h: f64,
) -> Result<ClosedFormResult> {
    match model.name() {
        "spin-z" => closed_form_spin_z(beta, h, model.hbar()),
        "spin-xz" => {
            let omega_x = model.fixed_omega_x().expect("spin-xz carries omega_x");
            closed_form_spin_xz(beta, h, omega_x, model.hbar())
        }
        "flux-qubit" => {
            let delta = model.fixed_delta().expect("flux-qubit carries delta");
            closed_form_flux(beta, h, delta, model.hbar())
        }
        other => Err(Error::Config(format!(
            "no closed form is available for model '{other}'"
        ))),
    }
}

/// Zero-temperature flux-qubit state: the ground-state projector
/// `ρ∞ = (1/2)[I + (Δσx + εσz)/ν]` and its analytic `ε`-derivative.
pub fn flux_ground_projector(
    delta: f64,
    eps: f64,
) -> Result<(HermitianOperator, HermitianOperator)> {
    let nu_sq = delta * delta + eps * eps;
    if nu_sq == 0.0 {
        return Err(Error::Degenerate {
            gap: 0.0,
            threshold: f64::MIN_POSITIVE,
        });
    }
    let nu = nu_sq.sqrt();
    let rho = Matrix::identity(2)
        .add(&sigma_x().scale(delta / nu))?
        .add(&sigma_z().scale(eps / nu))?
        .scale(0.5);
    let nu3 = nu * nu_sq;
    let drho = sigma_x()
        .scale(-delta * eps / (2.0 * nu3))
        .add(&sigma_z().scale(delta * delta / (2.0 * nu3)))?;
    Ok((
        HermitianOperator::from_trusted(rho),
        HermitianOperator::from_trusted(drho),
    ))
}
