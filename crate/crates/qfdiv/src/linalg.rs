//! Dense complex linear algebra helpers.
//!
//! Eigendecomposition uses cyclic Jacobi rotations, which keep full absolute
//! accuracy on the small Hermitian matrices this crate works with.

use nalgebra::{Complex, DMatrix};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

const MAX_SWEEPS: usize = 80;

/// Eigendecomposition `h = V diag(values) V†`, values sorted descending.
///
/// Each eigenvector is phase-fixed so that its first entry of largest modulus
/// is real and positive.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Rebuild `V diag(g(values)) V†`.
    pub fn map(&self, g: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let w = g(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Express `m` in the eigenbasis: `V† m V`.
    pub fn to_basis(&self, m: &CMatrix) -> CMatrix {
        self.vectors.adjoint() * m * &self.vectors
    }
}

pub fn eigh(h: &CMatrix) -> Eigh {
    let n = h.nrows();
    let mut a: Vec<C64> = h.as_slice().to_vec();
    let mut v = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i + i * n] = C64::new(1.0, 0.0);
    }
    jacobi(&mut a, n, Some(&mut v));

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j + j * n].re.total_cmp(&a[i + i * n].re));
    let values: Vec<f64> = order.iter().map(|&i| a[i + i * n].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for i in 0..n {
            let m = v[i + src * n].norm();
            if m > best_abs * (1.0 + 1e-12) {
                best = i;
                best_abs = m;
            }
        }
        let pivot = v[best + src * n];
        let phase = if best_abs > 0.0 {
            pivot.conj() / best_abs
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            vectors[(i, col)] = v[i + src * n] * phase;
        }
    }
    Eigh { values, vectors }
}

pub fn eigvalsh(h: &CMatrix) -> Vec<f64> {
    let n = h.nrows();
    let mut a: Vec<C64> = h.as_slice().to_vec();
    jacobi(&mut a, n, None);
    let mut values: Vec<f64> = (0..n).map(|i| a[i + i * n].re).collect();
    values.sort_by(|x, y| y.total_cmp(x));
    values
}

fn jacobi(a: &mut [C64], n: usize, mut v: Option<&mut [C64]>) {
    for i in 0..n {
        a[i + i * n] = C64::new(a[i + i * n].re, 0.0);
    }
    let fro2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    if fro2 == 0.0 || n < 2 {
        return;
    }
    let stop = fro2 * 1e-34;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for q in 1..n {
            for p in 0..q {
                off += a[p + q * n].norm_sqr();
            }
        }
        if off <= stop {
            break;
        }
        for q in 1..n {
            for p in 0..q {
                rotate(a, n, p, q, v.as_deref_mut());
            }
        }
    }
}

fn rotate(a: &mut [C64], n: usize, p: usize, q: usize, v: Option<&mut [C64]>) {
    let apq = a[p + q * n];
    let r = apq.norm();
    if r < 1e-300 {
        return;
    }
    let app = a[p + p * n].re;
    let aqq = a[q + q * n].re;
    let e = apq / r;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau == 0.0 {
        1.0
    } else {
        tau.signum() / (tau.abs() + tau.hypot(1.0))
    };
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;
    let ec = e.conj();

    // columns: A <- A W with W = [[c, s], [-s conj(e), c conj(e)]]
    for i in 0..n {
        let xp = a[i + p * n];
        let xq = a[i + q * n];
        a[i + p * n] = xp * c - xq * ec * s;
        a[i + q * n] = xp * s + xq * ec * c;
    }
    // rows: A <- W† A
    for j in 0..n {
        let xp = a[p + j * n];
        let xq = a[q + j * n];
        a[p + j * n] = xp * c - xq * e * s;
        a[q + j * n] = xp * s + xq * e * c;
    }
    a[p + p * n] = C64::new(app - t * r, 0.0);
    a[q + q * n] = C64::new(aqq + t * r, 0.0);
    a[p + q * n] = C64::new(0.0, 0.0);
    a[q + p * n] = C64::new(0.0, 0.0);

    if let Some(v) = v {
        for i in 0..n {
            let xp = v[i + p * n];
            let xq = v[i + q * n];
            v[i + p * n] = xp * c - xq * ec * s;
            v[i + q * n] = xp * s + xq * ec * c;
        }
    }
}

/// Largest entrywise deviation of `m` from its adjoint.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn real_trace(m: &CMatrix) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `(log a - log b) / (a - b)` with the diagonal limit `1 / a`.
pub fn log_mean_kernel(a: f64, b: f64) -> f64 {
    if a == b {
        return 1.0 / a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    let x = (hi - lo) / lo;
    if x < 1e-8 {
        (1.0 - x / 2.0 + x * x / 3.0) / lo
    } else {
        x.ln_1p() / (hi - lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMatrix {
        let g = CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        &g + g.adjoint()
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2, 3, 5, 16, 64] {
            for _ in 0..10 {
                let h = random_hermitian(n, &mut rng);
                let e = eigh(&h);
                let rebuilt = e.map(|x| x);
                assert!((rebuilt - &h).norm() < 1e-12 * (1.0 + h.norm()), "n={n}");
                let gram = e.vectors.adjoint() * &e.vectors;
                assert!((gram - identity(n)).norm() < 1e-12);
                assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn values_only_agree_with_full() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let h = random_hermitian(6, &mut rng);
        let a = eigvalsh(&h);
        let b = eigh(&h).values;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let h = identity(4) * c(2.5);
        let e = eigh(&h);
        assert!(e.values.iter().all(|&x| (x - 2.5).abs() < 1e-15));
    }

    #[test]
    fn pauli_y_eigenvalues() {
        let mut y = CMatrix::zeros(2, 2);
        y[(0, 1)] = C64::new(0.0, -1.0);
        y[(1, 0)] = C64::new(0.0, 1.0);
        let v = eigvalsh(&y);
        assert!((v[0] - 1.0).abs() < 1e-15 && (v[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_mean_kernel_limits() {
        assert!((log_mean_kernel(2.0, 2.0) - 0.5).abs() < 1e-16);
        let near = log_mean_kernel(2.0, 2.0 * (1.0 + 1e-10));
        assert!((near - 0.5).abs() < 1e-10);
        let far = log_mean_kernel(1.0, std::f64::consts::E);
        assert!((far - 1.0 / (std::f64::consts::E - 1.0)).abs() < 1e-15);
    }
}
