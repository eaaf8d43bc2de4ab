//! Atom in the ground state of a box `[0, 1]`, half of which (`x < 1/2`) is
//! illuminated. A null scattering result projects the atom onto the dark
//! half. Energies are in units of the ground-state energy, `E_n = n²`, with
//! eigenfunctions `√2 sin(nπx)`.

use std::f64::consts::PI;

use crate::error::{IfmError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DickeShift {
    pub n_basis: usize,
    pub e_before: f64,
    pub e_after: f64,
    /// Probability that the atom is found in the dark half (no scattering).
    pub p_null: f64,
    /// Fraction of the projected state's norm kept by the truncated basis.
    pub captured_norm: f64,
    /// False when the basis is too small to represent any change (one level).
    pub resolved: bool,
    /// Normalized energy-basis coefficients after the update.
    pub coefficients: Vec<f64>,
}

/// `⟨m|P|n⟩` for the projector onto `x ∈ [1/2, 1]`, `m, n ≥ 1`.
fn dark_half_element(m: usize, n: usize) -> f64 {
    if m == n {
        return 0.5;
    }
    let (m, n) = (m as f64, n as f64);
    let diff = m - n;
    let sum = m + n;
    -(diff * PI / 2.0).sin() / (diff * PI) + (sum * PI / 2.0).sin() / (sum * PI)
}

/// Overlaps `⟨n|P|1⟩` for `n = 1..=n_basis`.
pub fn half_well_overlaps(n_basis: usize) -> Vec<f64> {
    (1..=n_basis).map(|n| dark_half_element(n, 1)).collect()
}

pub fn dicke_energy_shift(n_basis: usize) -> Result<DickeShift> {
    if n_basis == 0 {
        return Err(IfmError::InvalidParameter("n_basis must be >= 1".into()));
    }
    let projected = half_well_overlaps(n_basis);
    let norm_sq: f64 = projected.iter().map(|c| c * c).sum();
    let p_null = dark_half_element(1, 1);
    let coefficients: Vec<f64> = projected.iter().map(|c| c / norm_sq.sqrt()).collect();
    let e_after = coefficients
        .iter()
        .enumerate()
        .map(|(k, c)| ((k + 1) * (k + 1)) as f64 * c * c)
        .sum();
    Ok(DickeShift {
        n_basis,
        e_before: 1.0,
        e_after,
        p_null,
        captured_norm: norm_sq / p_null,
        resolved: n_basis >= 2,
        coefficients,
    })
}
