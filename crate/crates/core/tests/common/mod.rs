//! Independent reference implementations shared by the integration tests
//! and the acceptance runner. Nothing here calls into the solver code paths
//! it is used to check.
#![allow(dead_code)]

use std::f64::consts::PI;

use arc_core::C64;
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, SVD, UPLO};
use rand::Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Random Hermitian matrix with entries uniform in [-1, 1].
pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> Array2<C64> {
    let mut h = Array2::from_elem((n, n), c(0.0, 0.0));
    for i in 0..n {
        h[[i, i]] = c(rng.random_range(-1.0..1.0), 0.0);
        for j in 0..i {
            let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            h[[i, j]] = z;
            h[[j, i]] = z.conj();
        }
    }
    h
}

/// Random physical correlation matrix: random eigenbasis, occupations in
/// [0, 1] (with exact 0, 1 and 1/2 mixed in).
pub fn random_correlation<R: Rng>(n: usize, rng: &mut R) -> Array2<C64> {
    let (_, w) = random_hermitian(n, rng).eigh(UPLO::Lower).unwrap();
    let eps: Vec<f64> = (0..n)
        .map(|_| match rng.random_range(0..6) {
            0 => 0.0,
            1 => 1.0,
            2 => 0.5,
            _ => rng.random_range(0.0..1.0),
        })
        .collect();
    let mut cm = Array2::from_elem((n, n), c(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            cm[[i, j]] = (0..n).map(|d| w[[i, d]] * w[[j, d]].conj() * eps[d]).sum();
        }
    }
    cm
}

/// `⟨c_n† c_m⟩` stored at `[m, n]`. Builds the many-body Gaussian density
/// matrix on `2^n` Fock states with Jordan-Wigner strings taken in the
/// order `order` (position p carries mode `order[p]`), treats it as a
/// vector in operator space and returns the entanglement entropy in bits
/// of the split after the first `cut` positions.
pub fn dense_osee(corr: &Array2<C64>, order: &[usize], cut: usize) -> f64 {
    let n = corr.nrows();
    let dim = 1usize << n;
    // Annihilators in the permuted site basis. Bit p (from the left) is
    // position p.
    let annihilators: Vec<Array2<C64>> = (0..n)
        .map(|p| {
            let mut a = Array2::from_elem((dim, dim), c(0.0, 0.0));
            for s in 0..dim {
                let bit = 1 << (n - 1 - p);
                if s & bit != 0 {
                    let parity = (0..p).filter(|&q| s & (1 << (n - 1 - q)) != 0).count();
                    a[[s ^ bit, s]] = c(if parity % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
                }
            }
            a
        })
        .collect();
    let mut mode_ops = vec![Array2::from_elem((dim, dim), c(0.0, 0.0)); n];
    for (p, &m) in order.iter().enumerate() {
        mode_ops[m] = annihilators[p].clone();
    }

    let (eps, w) = corr.eigh(UPLO::Lower).unwrap();
    let id: Array2<C64> = Array2::eye(dim);
    let mut rho = id.clone();
    for d in 0..n {
        let e = eps[d].clamp(0.0, 1.0);
        // b_d = Σ_m conj(W_md) c_m.
        let mut b = Array2::from_elem((dim, dim), c(0.0, 0.0));
        for m in 0..n {
            b = b + &mode_ops[m] * w[[m, d]].conj();
        }
        let bd = b.t().mapv(|z| z.conj());
        let num = bd.dot(&b);
        let factor = &id * c(1.0 - e, 0.0) + &num * c(2.0 * e - 1.0, 0.0);
        rho = rho.dot(&factor);
    }

    let na = cut;
    let nb = n - cut;
    let (da, db) = (1usize << na, 1usize << nb);
    let mut op = Array2::from_elem((da * da, db * db), c(0.0, 0.0));
    for s in 0..dim {
        for t in 0..dim {
            let (sa, sb) = (s >> nb, s & (db - 1));
            let (ta, tb) = (t >> nb, t & (db - 1));
            op[[sa * da + ta, sb * db + tb]] = rho[[s, t]];
        }
    }
    let (_, sv, _) = op.svd(false, false).unwrap();
    let total: f64 = sv.iter().map(|s| s * s).sum();
    sv.iter()
        .map(|s| s * s / total)
        .filter(|&p| p > 1e-300)
        .map(|p| -p * p.log2())
        .sum()
}

fn fermi(omega: f64, t: f64, mu: f64) -> f64 {
    if t == 0.0 {
        return if omega < mu { 1.0 } else if omega > mu { 0.0 } else { 0.5 };
    }
    let x = (omega - mu) / t;
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Semi-infinite chain self-energy from the principal square roots of
/// `z ∓ 2` at `z = ω + i0⁺`, scaled by the boundary coupling squared.
fn chain_self_energy(omega: f64, coupling: f64) -> C64 {
    let z = c(omega, 0.0);
    (z - (z - 2.0).sqrt() * (z + 2.0).sqrt()) * 0.5 * coupling * coupling
}

fn inverse_3x3(a: &[[C64; 3]; 3]) -> [[C64; 3]; 3] {
    let m = |i: usize, j: usize| a[i % 3][j % 3];
    let cof = |i: usize, j: usize| m(i + 1, j + 1) * m(i + 2, j + 2) - m(i + 1, j + 2) * m(i + 2, j + 1);
    let det = a[0][0] * cof(0, 0) + a[0][1] * cof(0, 1) + a[0][2] * cof(0, 2);
    let mut inv = [[c(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            inv[j][i] = cof(i, j) / det;
        }
    }
    inv
}

/// Landauer current of a three-site system between two unit-hopping
/// chains on a uniform trapezoid grid over the band.
pub struct TrapezoidOracle {
    pub h_s: [[f64; 3]; 3],
    pub coupling: f64,
    pub t: f64,
    pub mu_l: f64,
    pub mu_r: f64,
    pub points: usize,
}

impl TrapezoidOracle {
    pub fn paper() -> Self {
        TrapezoidOracle {
            h_s: [[0.0, 0.5, 0.0], [0.5, 0.5, 0.5], [0.0, 0.5, 0.0]],
            coupling: 1.0,
            t: 1.0 / 40.0,
            mu_l: 0.25,
            mu_r: -0.25,
            points: 1_000_000,
        }
    }

    pub fn transmission(&self, omega: f64) -> f64 {
        let s = chain_self_energy(omega, self.coupling);
        let mut a = [[c(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] = c(-self.h_s[i][j], 0.0);
            }
            a[i][i] += omega;
        }
        a[0][0] -= s;
        a[2][2] -= s;
        let g = inverse_3x3(&a);
        let gamma = -2.0 * s.im;
        gamma * gamma * g[0][2].norm_sqr()
    }

    pub fn current(&self) -> f64 {
        let (lo, hi) = (-2.0, 2.0);
        let h = (hi - lo) / self.points as f64;
        let f = |w: f64| self.transmission(w) * (fermi(w, self.t, self.mu_l) - fermi(w, self.t, self.mu_r));
        let mut sum = 0.5 * (f(lo) + f(hi));
        for k in 1..self.points {
            sum += f(lo + k as f64 * h);
        }
        sum * h / (2.0 * PI)
    }
}

/// ARC-like stable pair: `M = G e^{-iH}`, `P = (1 − G²) f` on the damped
/// modes, with at least one damped mode.
pub fn random_stable_pair<R: Rng>(n: usize, rng: &mut R) -> (Array2<C64>, Array2<C64>) {
    let h = random_hermitian(n, rng);
    let (lam, w) = h.eigh(UPLO::Lower).unwrap();
    let t = rng.random_range(0.3..2.0);
    let mut u = Array2::from_elem((n, n), c(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            u[[i, j]] = (0..n).map(|d| w[[i, d]] * c(0.0, -lam[d] * t).exp() * w[[j, d]].conj()).sum();
        }
    }
    let damped = rng.random_range(1..=n);
    let g: Array1<f64> = (0..n)
        .map(|i| if i < damped { rng.random_range(0.05..0.95) } else { 1.0 })
        .collect();
    let mut m = u;
    for i in 0..n {
        for j in 0..n {
            m[[i, j]] *= g[i];
        }
    }
    let mut p = Array2::from_elem((n, n), c(0.0, 0.0));
    for i in 0..n {
        p[[i, i]] = c((1.0 - g[i] * g[i]) * rng.random_range(0.0..1.0), 0.0);
    }
    (m, p)
}

/// Plain fixed-point iteration `C ← M C M† + P` from `C = 0`.
pub fn iterate_lyapunov(m: &Array2<C64>, p: &Array2<C64>, cycles: usize) -> Array2<C64> {
    let md = m.t().mapv(|z| z.conj());
    let mut x = p.clone();
    for _ in 0..cycles {
        x = m.dot(&x).dot(&md) + p;
    }
    x
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
