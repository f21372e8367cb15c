//! Small dense complex-vector helpers shared by the stages.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub type CVec = Vec<Complex64>;

/// `a^H b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    norm_sqr(a).sqrt()
}

/// One draw of CN(0, var).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

pub fn complex_normal_vec<R: Rng + ?Sized>(rng: &mut R, len: usize, var: f64) -> CVec {
    (0..len).map(|_| complex_normal(rng, var)).collect()
}

/// Indices of the `k` largest values, ties broken toward the lowest index.
/// The result is sorted by descending value.
pub fn top_k_indices(values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

/// Keeps the `k` largest-magnitude entries and zeroes the rest.
pub fn hard_threshold(z: &mut [Complex64], k: usize) {
    if k >= z.len() {
        return;
    }
    let mags: Vec<f64> = z.iter().map(|x| x.norm_sqr()).collect();
    let keep = top_k_indices(&mags, k);
    let mut mask = vec![false; z.len()];
    for i in keep {
        mask[i] = true;
    }
    for (x, keep) in z.iter_mut().zip(mask) {
        if !keep {
            *x = Complex64::new(0.0, 0.0);
        }
    }
}

/// Phase-aligned relative distance `min_phi ||a - e^{j phi} b|| / ||b||`.
pub fn phase_aligned_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let nb = norm(b);
    let c = inner(b, a);
    let phase = if c.norm() > 0.0 {
        c / c.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let d: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - phase * y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if nb > 0.0 {
        d / nb
    } else {
        d
    }
}

/// Hermitian matrix stored row-major as a flat `n x n` buffer.
#[derive(Debug, Clone)]
pub struct Hermitian {
    pub n: usize,
    pub data: CVec,
}

impl Hermitian {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    /// `self += w * x x^H`
    pub fn add_outer(&mut self, x: &[Complex64], w: f64) {
        let n = self.n;
        for i in 0..n {
            let xi = x[i] * w;
            let row = &mut self.data[i * n..(i + 1) * n];
            for (r, xj) in row.iter_mut().zip(x) {
                *r += xi * xj.conj();
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> CVec {
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Principal eigenvector by power iteration, unit norm, largest entry
    /// phase-normalized to be real positive.
    pub fn principal_eigenvector(&self, max_iters: usize, tol: f64) -> CVec {
        let n = self.n;
        // start from the heaviest column
        let best_col = (0..n)
            .max_by(|&a, &b| {
                let ca: f64 = (0..n).map(|i| self.data[i * n + a].norm_sqr()).sum();
                let cb: f64 = (0..n).map(|i| self.data[i * n + b].norm_sqr()).sum();
                ca.total_cmp(&cb).then(b.cmp(&a))
            })
            .unwrap_or(0);
        let start: CVec = (0..n).map(|i| self.data[i * n + best_col]).collect();
        power_iteration(|v| self.mul_vec(v), start, max_iters, tol)
    }
}

/// Power iteration for a Hermitian PSD operator given as a closure.
/// A zero start vector is replaced by the uniform vector.
pub fn power_iteration<F>(apply: F, start: CVec, max_iters: usize, tol: f64) -> CVec
where
    F: Fn(&[Complex64]) -> CVec,
{
    let n = start.len();
    let mut v = start;
    let nv = norm(&v);
    if nv == 0.0 {
        v = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    } else {
        v.iter_mut().for_each(|x| *x /= nv);
    }
    for _ in 0..max_iters {
        let mut w = apply(&v);
        let nw = norm(&w);
        if nw == 0.0 {
            break;
        }
        w.iter_mut().for_each(|x| *x /= nw);
        let c = inner(&v, &w);
        let phase = if c.norm() > 0.0 {
            c.conj() / c.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        w.iter_mut().for_each(|x| *x *= phase);
        let diff = v
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        v = w;
        if diff < tol {
            break;
        }
    }
    normalize_phase(&mut v);
    v
}

/// Rotates `v` so its largest-magnitude entry is real positive.
pub fn normalize_phase(v: &mut [Complex64]) {
    if let Some(p) = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
    {
        if p.norm() > 0.0 {
            let rot = p.conj() / p.norm();
            v.iter_mut().for_each(|x| *x *= rot);
        }
    }
}
