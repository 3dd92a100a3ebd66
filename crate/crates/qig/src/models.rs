//! Parametric Hamiltonian families and their thermal states.
//!
//! Built-in two-level models:
//! - `spin-z`: `H(ω) = (ħω/2) σz`, tunable Larmor frequency `ω`.
//! - `spin-xz`: `H(ω_z) = (ħ/2)(ω_x σx + ω_z σz)`, fixed `ω_x`, tunable `ω_z`.
//! - `flux-qubit`: `H(ε) = -(ħ/2)(Δ σx + ε σz)`, fixed gap `Δ`, tunable bias `ε`.
//!
//! The `generic` model takes Hamiltonians tabulated on an `h` grid from a
//! JSON file and interpolates linearly, with the parameter derivative from
//! Richardson-extrapolated central differences.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Deserialize;

use crate::hermitian::{eig_named, HermitianOperator, Matrix, SpectralDecomposition};
use crate::{Error, Result};

/// Degeneracy threshold for thermal-state construction, relative to the
/// spectral scale: adjacent energies closer than this make the eigenbasis
/// (and the interferometric constructions on it) ill-defined.
pub const STATE_DEGENERACY_TOL: f64 = 1e-12;

/// Central-difference step for the generic model's parameter derivative.
const GENERIC_FD_STEP: f64 = 1e-5;

pub fn sigma_x() -> Matrix {
    Matrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2")
}

pub fn sigma_z() -> Matrix {
    Matrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]).expect("2x2")
}

#[derive(Debug, Clone)]
enum ModelKind {
    SpinZ,
    SpinXz { omega_x: f64 },
    FluxQubit { delta: f64 },
    Generic(GenericModel),
}

/// A parametric Hamiltonian family `h -> H(h)` with its analytic parameter
/// derivative and fixed parameters.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    name: String,
    hbar: f64,
    h_name: String,
    kind: ModelKind,
}

impl ModelSpec {
    /// Builds a model from its CLI/config name and fixed-parameter map.
    ///
    /// Accepted names: `spin-z`, `spin-xz`, `flux-qubit`. The `generic`
    /// model is built from a tabulated file via [`ModelSpec::generic`].
    /// Recognized parameters: `hbar` (all models, default 1), `omega_x`
    /// (spin-xz, required nonzero), `delta` (flux-qubit, required).
    pub fn from_params(name: &str, fixed_params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
        let mut params = fixed_params.clone();
        let hbar = params.remove("hbar").unwrap_or(1.0);
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::Config(format!("hbar must be positive, got {hbar}")));
        }
        let model = match name {
            "spin-z" => ModelSpec::spin_z(hbar),
            "spin-xz" => {
                let omega_x = params
                    .remove("omega_x")
                    .ok_or_else(|| Error::Config("spin-xz requires omega_x".into()))?;
                ModelSpec::spin_xz(hbar, omega_x)?
            }
            "flux-qubit" => {
                let delta = params
                    .remove("delta")
                    .ok_or_else(|| Error::Config("flux-qubit requires delta".into()))?;
                ModelSpec::flux_qubit(hbar, delta)
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown model '{other}' (builtin models: spin-z, spin-xz, flux-qubit; tabulated ones load as generic)"
                )))
            }
        };
        if let Some(extra) = params.keys().next() {
            return Err(Error::Config(format!(
                "unknown fixed parameter '{extra}' for model '{name}'"
            )));
        }
        Ok(model)
    }

    pub fn spin_z(hbar: f64) -> ModelSpec {
        ModelSpec {
            name: "spin-z".into(),
            hbar,
            h_name: "omega".into(),
            kind: ModelKind::SpinZ,
        }
    }

    pub fn spin_xz(hbar: f64, omega_x: f64) -> Result<ModelSpec> {
        if omega_x == 0.0 || !omega_x.is_finite() {
            return Err(Error::Config(format!(
                "spin-xz requires a finite nonzero omega_x, got {omega_x}"
            )));
        }
        Ok(ModelSpec {
            name: "spin-xz".into(),
            hbar,
            h_name: "omega_z".into(),
            kind: ModelKind::SpinXz { omega_x },
        })
    }

    pub fn flux_qubit(hbar: f64, delta: f64) -> ModelSpec {
        ModelSpec {
            name: "flux-qubit".into(),
            hbar,
            h_name: "epsilon".into(),
            kind: ModelKind::FluxQubit { delta },
        }
    }

    pub fn generic(table: GenericModel) -> ModelSpec {
        let h_name = table.h_name.clone().unwrap_or_else(|| "h".into());
        ModelSpec {
            name: "generic".into(),
            hbar: 1.0,
            h_name,
            kind: ModelKind::Generic(table),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Label of the tunable parameter (`omega`, `omega_z`, `epsilon`, or the
    /// generic table's own name).
    pub fn h_name(&self) -> &str {
        &self.h_name
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ModelKind::Generic(table) => table.dim,
            _ => 2,
        }
    }

    /// True when closed-form tensors exist for this model.
    pub fn has_closed_form(&self) -> bool {
        !matches!(self.kind, ModelKind::Generic(_))
    }

    pub fn fixed_omega_x(&self) -> Option<f64> {
        match self.kind {
            ModelKind::SpinXz { omega_x } => Some(omega_x),
            _ => None,
        }
    }

    pub fn fixed_delta(&self) -> Option<f64> {
        match self.kind {
            ModelKind::FluxQubit { delta } => Some(delta),
            _ => None,
        }
    }

    /// `H(h)`.
    pub fn hamiltonian(&self, h: f64) -> Result<HermitianOperator> {
        if !h.is_finite() {
            return Err(Error::Config(format!(
                "parameter value must be finite, got {h}"
            )));
        }
        let half = self.hbar / 2.0;
        match &self.kind {
            ModelKind::SpinZ => Ok(HermitianOperator::from_trusted(sigma_z().scale(half * h))),
            ModelKind::SpinXz { omega_x } => {
                let m = sigma_x()
                    .scale(half * omega_x)
                    .add(&sigma_z().scale(half * h))?;
                Ok(HermitianOperator::from_trusted(m))
            }
            ModelKind::FluxQubit { delta } => {
                let m = sigma_x()
                    .scale(-half * delta)
                    .add(&sigma_z().scale(-half * h))?;
                Ok(HermitianOperator::from_trusted(m))
            }
            ModelKind::Generic(table) => table.eval(h),
        }
    }

    /// Analytic `∂H/∂h`; central differences for the generic model.
    pub fn d_hamiltonian(&self, h: f64) -> Result<HermitianOperator> {
        let half = self.hbar / 2.0;
        match &self.kind {
            ModelKind::SpinZ | ModelKind::SpinXz { .. } => {
                Ok(HermitianOperator::from_trusted(sigma_z().scale(half)))
            }
            ModelKind::FluxQubit { .. } => {
                Ok(HermitianOperator::from_trusted(sigma_z().scale(-half)))
            }
            ModelKind::Generic(table) => table.derivative(h),
        }
    }
}

/// Gibbs state `ρ(β, h) = e^{-βH}/Z` held in spectral form: ascending
/// energies, eigenbasis of `H`, and the Gibbs weights over that basis.
#[derive(Debug, Clone)]
pub struct ThermalState {
    beta: f64,
    h: f64,
    probabilities: Vec<f64>,
    basis: SpectralDecomposition,
    rho: HermitianOperator,
}

impl ThermalState {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Gibbs weights in ascending-energy order; sum to one.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Energy eigenvalues, ascending (aliases the basis eigenvalues).
    pub fn energies(&self) -> &[f64] {
        self.basis.eigenvalues()
    }

    pub fn basis(&self) -> &SpectralDecomposition {
        &self.basis
    }

    pub fn rho(&self) -> &HermitianOperator {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.probabilities.len()
    }
}

/// Constructs the thermal state of `model` at inverse temperature `beta` and
/// parameter value `h`.
///
/// Probabilities are computed from max-shifted exponentials
/// `p_n ∝ exp(-β(E_n - E_min))`, which is algebraically the Gibbs weight but
/// survives large `β` without overflow.
pub fn thermal_state(model: &ModelSpec, beta: f64, h: f64) -> Result<ThermalState> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Contract(format!(
            "thermal_state requires finite beta > 0, got {beta}"
        )));
    }
    let hamiltonian = model.hamiltonian(h)?;
    let basis = eig_named(&hamiltonian, &format!("H({h}) of model {}", model.name()))?;

    let scale = basis.spectral_radius().max(1.0);
    let gap = basis.min_gap();
    if gap < STATE_DEGENERACY_TOL * scale {
        return Err(Error::Degenerate {
            gap,
            threshold: STATE_DEGENERACY_TOL * scale,
        });
    }

    let e_min = basis.eigenvalues()[0];
    let weights: Vec<f64> = basis
        .eigenvalues()
        .iter()
        .map(|&e| (-beta * (e - e_min)).exp())
        .collect();
    let z_shifted: f64 = weights.iter().sum();
    let probabilities: Vec<f64> = weights.iter().map(|w| w / z_shifted).collect();

    let rho = HermitianOperator::from_trusted(basis.weighted_sum(&probabilities)?);

    Ok(ThermalState {
        beta,
        h,
        probabilities,
        basis,
        rho,
    })
}

/// The flux-qubit eigenvectors in the fixed real gauge, as explicit unit
/// vectors: `n0` spans the excited level `+ħν/2`, `n1` the ground level
/// `-ħν/2`, with `ν = √(Δ² + ε²)`.
pub fn flux_eigvecs(delta: f64, eps: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let nu = (delta * delta + eps * eps).sqrt();
    if nu == 0.0 {
        return Err(Error::Degenerate {
            gap: 0.0,
            threshold: f64::MIN_POSITIVE,
        });
    }
    let real2 = |a: f64, b: f64| vec![Complex64::new(a, 0.0), Complex64::new(b, 0.0)];
    if delta == 0.0 {
        // σz limit: the closed-form denominators vanish, but the
        // eigenvectors are the computational basis states.
        return if eps > 0.0 {
            Ok((real2(0.0, 1.0), real2(1.0, 0.0)))
        } else {
            Ok((real2(1.0, 0.0), real2(0.0, 1.0)))
        };
    }
    let inv_sqrt2 = 1.0 / (2.0f64).sqrt();
    let denom0 = (eps * eps + delta * delta - eps * nu).sqrt();
    let denom1 = (eps * eps + delta * delta + eps * nu).sqrt();
    let n0 = real2(inv_sqrt2 * (eps - nu) / denom0, inv_sqrt2 * delta / denom0);
    let n1 = real2(inv_sqrt2 * (eps + nu) / denom1, inv_sqrt2 * delta / denom1);
    Ok((n0, n1))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenericModelFile {
    dim: usize,
    h_grid: Vec<f64>,
    #[serde(rename = "H_entries")]
    h_entries: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    h_name: Option<String>,
}

/// User-supplied Hamiltonian family tabulated on an `h` grid.
///
/// `H(h)` interpolates the tabulated matrices linearly in `h`; finite
/// differencing for `∂H/∂h` may step just past the grid ends, where the
/// boundary segment is extended linearly.
#[derive(Debug, Clone)]
pub struct GenericModel {
    dim: usize,
    h_grid: Vec<f64>,
    matrices: Vec<HermitianOperator>,
    h_name: Option<String>,
}

impl GenericModel {
    pub fn from_json_str(text: &str) -> Result<GenericModel> {
        let file: GenericModelFile = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("generic model file: {e}")))?;
        Self::from_file(file)
    }

    fn from_file(file: GenericModelFile) -> Result<GenericModel> {
        if file.dim == 0 {
            return Err(Error::Config("generic model dim must be >= 1".into()));
        }
        if file.h_grid.len() < 2 {
            return Err(Error::Config(
                "generic model needs at least 2 grid points".into(),
            ));
        }
        if !file.h_grid.iter().all(|x| x.is_finite()) {
            return Err(Error::Config(
                "generic model h_grid has non-finite values".into(),
            ));
        }
        if file.h_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "generic model h_grid must be strictly increasing".into(),
            ));
        }
        if file.h_entries.len() != file.h_grid.len() {
            return Err(Error::Config(format!(
                "generic model has {} grid points but {} matrices",
                file.h_grid.len(),
                file.h_entries.len()
            )));
        }
        let mut matrices = Vec::with_capacity(file.h_entries.len());
        for (g, rows) in file.h_entries.iter().enumerate() {
            if rows.len() != file.dim || rows.iter().any(|r| r.len() != file.dim) {
                return Err(Error::Config(format!(
                    "generic model matrix {g} is not {0}x{0}",
                    file.dim
                )));
            }
            let mut m = Matrix::zeros(file.dim);
            for (i, row) in rows.iter().enumerate() {
                for (j, &[re, im]) in row.iter().enumerate() {
                    m.set(i, j, Complex64::new(re, im));
                }
            }
            let op = HermitianOperator::new(m)
                .map_err(|e| Error::Config(format!("generic model matrix {g} is invalid: {e}")))?;
            matrices.push(op);
        }
        Ok(GenericModel {
            dim: file.dim,
            h_grid: file.h_grid,
            matrices,
            h_name: file.h_name,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h_range(&self) -> (f64, f64) {
        (self.h_grid[0], *self.h_grid.last().expect("nonempty grid"))
    }

    fn extrapolation_margin(&self) -> f64 {
        let (lo, hi) = self.h_range();
        ((hi - lo) * 1e-3).max(1e-3)
    }

    fn eval(&self, h: f64) -> Result<HermitianOperator> {
        let (lo, hi) = self.h_range();
        let margin = self.extrapolation_margin();
        if h < lo - margin || h > hi + margin {
            return Err(Error::Config(format!(
                "h = {h} outside the tabulated range [{lo}, {hi}]"
            )));
        }
        // Segment index; values just past the ends use the boundary segment.
        let seg = match self.h_grid.iter().rposition(|&x| x <= h) {
            None => 0,
            Some(i) => i.min(self.h_grid.len() - 2),
        };
        let h0 = self.h_grid[seg];
        let h1 = self.h_grid[seg + 1];
        let t = (h - h0) / (h1 - h0);
        let m = self.matrices[seg]
            .matrix()
            .scale(1.0 - t)
            .add(&self.matrices[seg + 1].matrix().scale(t))?;
        Ok(HermitianOperator::from_trusted(m))
    }

    fn derivative(&self, h: f64) -> Result<HermitianOperator> {
        let coarse = self.central_diff(h, GENERIC_FD_STEP)?;
        let fine = self.central_diff(h, GENERIC_FD_STEP / 2.0)?;
        // One Richardson level: (4 D(s/2) - D(s)) / 3.
        let m = fine.scale(4.0).sub(&coarse)?.scale(1.0 / 3.0);
        Ok(HermitianOperator::from_trusted(m))
    }

    fn central_diff(&self, h: f64, step: f64) -> Result<Matrix> {
        let plus = self.eval(h + step)?;
        let minus = self.eval(h - step)?;
        Ok(plus.matrix().sub(minus.matrix())?.scale(1.0 / (2.0 * step)))
    }
}
