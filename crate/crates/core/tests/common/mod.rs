//! Shared fixtures for integration tests.

use mintwist::clifford::{GammaRep, RealStructure};
use mintwist::geometry::{ScalarField, SpinorField, TorusGrid};
use mintwist::twist::TwistedElement;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn setup_m2(points: usize) -> (TorusGrid, GammaRep, RealStructure) {
    let grid = TorusGrid::standard(4, points).unwrap();
    let rep = GammaRep::euclidean(2).unwrap();
    let j = RealStructure::dim4(&rep).unwrap();
    (grid, rep, j)
}

/// Smooth band-limited complex scalar: content on |k| <= 1 per axis.
pub fn smooth_scalar(grid: &TorusGrid, amp: f64, rng: &mut ChaCha8Rng) -> ScalarField {
    let n = grid.axes();
    let coefs: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| {
            (
                rng.random_range(-amp..amp),
                rng.random_range(-amp..amp),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let offset = Complex64::new(rng.random_range(0.5..1.5), rng.random_range(-amp..amp));
    ScalarField::from_fn(grid, |x| {
        let mut v = offset;
        for (mu, &(cr, ci, phase)) in coefs.iter().enumerate() {
            v += Complex64::new(cr, ci) * (x[mu] + phase).sin();
        }
        v
    })
}

/// Random element of the doubled algebra with smooth entries.
pub fn smooth_element(grid: &TorusGrid, amp: f64, rng: &mut ChaCha8Rng) -> TwistedElement {
    TwistedElement::new(smooth_scalar(grid, amp, rng), smooth_scalar(grid, amp, rng))
}

/// Nowhere-vanishing h with band-limited log-modulus of amplitude `amp`
/// and a band-limited phase.
pub fn smooth_nonvanishing(grid: &TorusGrid, amp: f64, rng: &mut ChaCha8Rng) -> ScalarField {
    let n = grid.axes();
    let coefs: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| {
            (
                rng.random_range(-amp..amp),
                rng.random_range(-amp..amp),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    ScalarField::from_fn(grid, |x| {
        let mut log_mod = 0.0;
        let mut phase = 0.0;
        for (mu, &(c_mod, c_ph, off)) in coefs.iter().enumerate() {
            log_mod += c_mod * (x[mu] + off).sin();
            phase += c_ph * (x[mu] - off).cos();
        }
        Complex64::new(log_mod / 2.0, phase).exp()
    })
}

#[allow(dead_code)]
pub fn battery(grid: &TorusGrid, dim: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<SpinorField> {
    (0..count)
        .map(|_| SpinorField::random_band_limited(grid, dim, 1, rng))
        .collect()
}
