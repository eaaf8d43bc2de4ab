#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use ifm::optics::{Circuit, DetectorSet, ElementKind, OpticalElement};
use ifm::{ModeSpace, PureState};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C = Complex64;
pub type Matrix = Vec<Vec<C>>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { c(1., 0.) } else { c(0., 0.) }).collect())
        .collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| (0..m).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect())
        .collect()
}

pub fn matvec(a: &Matrix, v: &[C]) -> Vec<C> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (na, nb) = (a.len(), b.len());
    let mut out = vec![vec![c(0., 0.); na * nb]; na * nb];
    for i in 0..na {
        for j in 0..na {
            for k in 0..nb {
                for l in 0..nb {
                    out[i * nb + k][j * nb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Matrix of one element written out from the textbook definitions.
pub fn element_matrix(space: &ModeSpace, el: &OpticalElement) -> Matrix {
    let n = space.size();
    let mut m = identity(n);
    let idx = |s: &str| space.index_of(s).unwrap();
    match &el.kind {
        ElementKind::BeamSplitter { a, b, reflectivity } => {
            let (i, j) = (idx(a), idx(b));
            let t = (1.0 - reflectivity).sqrt();
            let r = reflectivity.sqrt();
            m[i][i] = c(t, 0.);
            m[j][j] = c(t, 0.);
            m[i][j] = c(0., r);
            m[j][i] = c(0., r);
        }
        ElementKind::Mirror { mode } => m[idx(mode)][idx(mode)] = c(0., 1.),
        ElementKind::PhaseShift { mode, phase } => {
            m[idx(mode)][idx(mode)] = C::from_polar(1.0, *phase)
        }
        ElementKind::Absorber { mode, transmission } => m[idx(mode)][idx(mode)] = *transmission,
        ElementKind::Detectors(_) => {}
    }
    m
}

pub fn step_matrix(space: &ModeSpace, step: &[OpticalElement]) -> Matrix {
    step.iter()
        .fold(identity(space.size()), |acc, el| matmul(&element_matrix(space, el), &acc))
}

/// Product of all step matrices, last step on the left.
pub fn circuit_matrix(circuit: &Circuit) -> Matrix {
    let space = circuit.space();
    circuit
        .steps()
        .iter()
        .fold(identity(space.size()), |acc, step| matmul(&step_matrix(space, step), &acc))
}

pub fn norm_sq(v: &[C]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

pub struct RandomCase {
    pub circuit: Circuit,
    pub input: PureState,
}

/// Random circuit over at most `max_modes` modes and `max_steps` steps,
/// ending in a detector step on a random subset of modes.
pub fn random_case(seed: u64, max_modes: usize, max_steps: usize) -> RandomCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_modes);
    let labels: Vec<String> = (0..n).map(|k| format!("m{k}")).collect();
    let space = Arc::new(ModeSpace::new(labels.clone()).unwrap());
    let n_steps = rng.random_range(0..=max_steps);
    let mut steps = Vec::with_capacity(n_steps + 1);
    for k in 0..n_steps {
        let mut free = labels.clone();
        free.shuffle(&mut rng);
        let mut step = Vec::new();
        while let Some(mode) = free.pop() {
            let id = format!("e{k}_{}", step.len());
            match rng.random_range(0..5) {
                0 if !free.is_empty() => {
                    let other = free.pop().unwrap();
                    let r = match rng.random_range(0..4) {
                        0 => 0.0,
                        1 => 1.0,
                        _ => rng.random::<f64>(),
                    };
                    step.push(OpticalElement::beam_splitter(id, mode, other, r));
                }
                1 => step.push(OpticalElement::mirror(id, mode)),
                2 => step.push(OpticalElement::phase_shift(id, mode, rng.random_range(-PI..PI))),
                3 => {
                    let t = if rng.random_bool(0.3) {
                        c(0., 0.)
                    } else {
                        C::from_polar(rng.random::<f64>(), rng.random_range(-PI..PI))
                    };
                    step.push(OpticalElement::absorber(id, mode, t));
                }
                _ => {}
            }
        }
        steps.push(step);
    }
    let watched = rng.random_range(1..=n);
    let mut order = labels.clone();
    order.shuffle(&mut rng);
    let set = DetectorSet::new(
        order[..watched]
            .iter()
            .enumerate()
            .map(|(k, m)| (format!("D{k}"), m.clone())),
    )
    .unwrap();
    steps.push(vec![OpticalElement::detectors("detectors", set)]);
    let circuit = Circuit::new(Arc::clone(&space), steps).unwrap();

    let input = if rng.random_bool(0.5) {
        ifm::make_state(Arc::clone(&space), &labels[rng.random_range(0..n)]).unwrap()
    } else {
        let raw: Vec<C> = (0..n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = norm_sq(&raw).sqrt();
        PureState::from_amplitudes(Arc::clone(&space), raw.iter().map(|x| x / norm).collect())
            .unwrap()
    };
    RandomCase { circuit, input }
}

/// Simpson's rule on `[a, b]` with `intervals` (even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let mut s = f(a) + f(b);
    for k in 1..intervals {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Energy after the dark-half projection computed in position space: the
/// overlaps come from quadrature, and the kinetic energy from quadrature of
/// the derivative of the truncated reconstruction.
pub fn dicke_quadrature(n_basis: usize, intervals: usize) -> f64 {
    let psi = |n: usize, x: f64| 2f64.sqrt() * (n as f64 * PI * x).sin();
    let coeffs: Vec<f64> = (1..=n_basis)
        .map(|n| simpson(|x| psi(n, x) * psi(1, x), 0.5, 1.0, intervals))
        .collect();
    let recon = |x: f64| -> f64 {
        coeffs.iter().enumerate().map(|(k, cn)| cn * psi(k + 1, x)).sum()
    };
    let slope = |x: f64| -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, cn)| {
                let kk = (k + 1) as f64;
                cn * 2f64.sqrt() * kk * PI * (kk * PI * x).cos()
            })
            .sum()
    };
    let norm = simpson(|x| recon(x).powi(2), 0.0, 1.0, intervals);
    let kinetic = simpson(|x| slope(x).powi(2), 0.0, 1.0, intervals);
    kinetic / (PI * PI * norm)
}
