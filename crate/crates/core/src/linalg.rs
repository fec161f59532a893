//! Symmetric positive-definite systems with dense or banded storage.
//!
//! Only the lower triangle is stored. The banded layout keeps, for row `i`,
//! columns `i - bw ..= i` contiguously, so Cholesky inner products run over
//! contiguous memory in both layouts.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) enum Storage {
    /// Row-major `n x n`, lower triangle used.
    Dense,
    /// Row `i` holds columns `i - bw ..= i` at offsets `0 ..= bw`.
    Banded { bw: usize },
}

#[derive(Debug, Clone)]
pub(crate) struct SpdSystem {
    n: usize,
    storage: Storage,
    a: Vec<f64>,
}

impl SpdSystem {
    pub(crate) fn dense(n: usize) -> Self {
        Self {
            n,
            storage: Storage::Dense,
            a: vec![0.0; n * n],
        }
    }

    pub(crate) fn banded(n: usize, bw: usize) -> Self {
        let bw = bw.min(n.saturating_sub(1));
        Self {
            n,
            storage: Storage::Banded { bw },
            a: vec![0.0; n * (bw + 1)],
        }
    }

    pub(crate) fn is_banded(&self) -> bool {
        matches!(self.storage, Storage::Banded { .. })
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i);
        match self.storage {
            Storage::Dense => i * self.n + j,
            Storage::Banded { bw } => i * (bw + 1) + (j + bw - i),
        }
    }

    pub(crate) fn clear(&mut self) {
        self.a.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Add `v` to entry `(i, j)`, `j <= i`. Banded storage ignores entries
    /// outside the band; callers size the band to cover their pattern.
    #[inline]
    pub(crate) fn add(&mut self, i: usize, j: usize, v: f64) {
        if let Storage::Banded { bw } = self.storage {
            if i - j > bw {
                debug_assert!(v == 0.0, "entry ({i}, {j}) outside band {bw}");
                return;
            }
        }
        let k = self.idx(i, j);
        self.a[k] += v;
    }

    /// In-place lower Cholesky factorization.
    pub(crate) fn factor(&mut self) -> Result<()> {
        let n = self.n;
        match self.storage {
            Storage::Dense => {
                for j in 0..n {
                    let rj = j * n;
                    let mut d = self.a[rj + j];
                    for k in 0..j {
                        d -= self.a[rj + k] * self.a[rj + k];
                    }
                    if !(d > 0.0 && d.is_finite()) {
                        return Err(Error::NotPositiveDefinite { pivot: j });
                    }
                    let d = d.sqrt();
                    self.a[rj + j] = d;
                    for i in j + 1..n {
                        let ri = i * n;
                        let mut s = self.a[ri + j];
                        for k in 0..j {
                            s -= self.a[ri + k] * self.a[rj + k];
                        }
                        self.a[ri + j] = s / d;
                    }
                }
            }
            Storage::Banded { bw } => {
                let w = bw + 1;
                for i in 0..n {
                    let lo = i.saturating_sub(bw);
                    for j in lo..=i {
                        // k runs over lo..j; row i offset k+bw-i, row j offset k+bw-j
                        let ri = i * w + bw - i;
                        let rj = j * w + bw - j;
                        let mut s = self.a[ri + j];
                        for k in lo..j {
                            s -= self.a[ri + k] * self.a[rj + k];
                        }
                        if i == j {
                            if !(s > 0.0 && s.is_finite()) {
                                return Err(Error::NotPositiveDefinite { pivot: i });
                            }
                            self.a[ri + i] = s.sqrt();
                        } else {
                            self.a[ri + j] = s / self.a[rj + j];
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Solve `L x = b` in place (after `factor`).
    #[allow(clippy::needless_range_loop)]
    pub(crate) fn solve_lower(&self, x: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let lo = match self.storage {
                Storage::Dense => 0,
                Storage::Banded { bw } => i.saturating_sub(bw),
            };
            let mut s = x[i];
            for k in lo..i {
                s -= self.a[self.idx(i, k)] * x[k];
            }
            x[i] = s / self.a[self.idx(i, i)];
        }
    }

    /// Solve `L^T x = b` in place (after `factor`).
    #[allow(clippy::needless_range_loop)]
    pub(crate) fn solve_upper(&self, x: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let hi = match self.storage {
                Storage::Dense => n,
                Storage::Banded { bw } => (i + bw + 1).min(n),
            };
            let mut s = x[i];
            for k in i + 1..hi {
                s -= self.a[self.idx(k, i)] * x[k];
            }
            x[i] = s / self.a[self.idx(i, i)];
        }
    }

    /// Draw `A^{-1} b + sqrt(sigma2) L^{-T} z`, `z ~ N(0, I)`, into `out`.
    /// `A` must already be factored.
    pub(crate) fn sample_into<R: Rng + ?Sized>(
        &self,
        b: &[f64],
        sigma2: f64,
        rng: &mut R,
        out: &mut [f64],
        noise: &mut [f64],
    ) {
        out.copy_from_slice(b);
        self.solve_lower(out);
        self.solve_upper(out);
        for z in noise.iter_mut() {
            *z = rng.sample(StandardNormal);
        }
        self.solve_upper(noise);
        let sd = sigma2.sqrt();
        for (o, z) in out.iter_mut().zip(noise.iter()) {
            *o += sd * z;
        }
    }
}

/// Lower Cholesky factor of a dense symmetric matrix.
pub(crate) fn cholesky_dense(m: &Array2<f64>) -> Result<Array2<f64>> {
    let n = m.nrows();
    let mut sys = SpdSystem::dense(n);
    for i in 0..n {
        for j in 0..=i {
            sys.add(i, j, m[[i, j]]);
        }
    }
    sys.factor()?;
    let mut l = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            l[[i, j]] = sys.a[sys.idx(i, j)];
        }
    }
    Ok(l)
}

/// One exact draw from `N(A^{-1} Xty, sigma2 A^{-1})` with `A = XtX + prec`.
pub fn sample_beta_conditional<R: Rng + ?Sized>(
    xtx: &Array2<f64>,
    xty: &Array1<f64>,
    prec: &Array2<f64>,
    sigma2: f64,
    rng: &mut R,
) -> Result<Array1<f64>> {
    let p = xty.len();
    if xtx.dim() != (p, p) || prec.dim() != (p, p) {
        return Err(Error::DimensionMismatch(format!(
            "XtX {:?} and precision {:?} must be {p} x {p}",
            xtx.dim(),
            prec.dim()
        )));
    }
    crate::error::ensure_positive("sigma2", sigma2)?;
    let mut sys = SpdSystem::dense(p);
    for i in 0..p {
        for j in 0..=i {
            sys.add(i, j, xtx[[i, j]] + prec[[i, j]]);
        }
    }
    sys.factor()?;
    let mut out = vec![0.0; p];
    let mut noise = vec![0.0; p];
    sys.sample_into(
        xty.as_slice().expect("contiguous"),
        sigma2,
        rng,
        &mut out,
        &mut noise,
    );
    Ok(Array1::from(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tridiag(n: usize) -> Array2<f64> {
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            m[[i, i]] = 2.5 + i as f64 * 0.1;
            if i + 1 < n {
                m[[i, i + 1]] = -1.0;
                m[[i + 1, i]] = -1.0;
            }
        }
        m
    }

    #[test]
    fn dense_factor_reconstructs() {
        let m = tridiag(6);
        let l = cholesky_dense(&m).unwrap();
        let back = l.dot(&l.t());
        for (a, b) in back.iter().zip(m.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn banded_and_dense_solves_agree() {
        let n = 12;
        let bw = 3;
        let mut m = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            m[[i, i]] = 10.0;
            for d in 1..=bw {
                if i + d < n {
                    let v = -1.0 / d as f64;
                    m[[i, i + d]] = v;
                    m[[i + d, i]] = v;
                }
            }
        }
        let mut dense = SpdSystem::dense(n);
        let mut band = SpdSystem::banded(n, bw);
        for i in 0..n {
            for j in 0..=i {
                dense.add(i, j, m[[i, j]]);
                band.add(i, j, m[[i, j]]);
            }
        }
        dense.factor().unwrap();
        band.factor().unwrap();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x1 = rhs.clone();
        let mut x2 = rhs.clone();
        dense.solve_lower(&mut x1);
        dense.solve_upper(&mut x1);
        band.solve_lower(&mut x2);
        band.solve_upper(&mut x2);
        for (a, b) in x1.iter().zip(&x2) {
            assert!((a - b).abs() < 1e-13);
        }
        let ax = m.dot(&Array1::from(x1));
        for (a, b) in ax.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn not_positive_definite_reports_pivot() {
        let mut m = tridiag(4);
        m[[2, 2]] = -1.0;
        assert_eq!(
            cholesky_dense(&m),
            Err(Error::NotPositiveDefinite { pivot: 2 })
        );

        let mut band = SpdSystem::banded(3, 1);
        band.add(0, 0, 1.0);
        band.add(1, 0, 2.0);
        band.add(1, 1, 1.0);
        band.add(2, 2, 1.0);
        assert_eq!(band.factor(), Err(Error::NotPositiveDefinite { pivot: 1 }));
    }

    #[test]
    fn identity_system_gives_standard_normals() {
        let p = 3;
        let xtx = Array2::zeros((p, p));
        let prec = Array2::eye(p);
        let xty = Array1::zeros(p);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let mut sum = vec![0.0; p];
        let mut sq = vec![0.0; p];
        for _ in 0..n {
            let b = sample_beta_conditional(&xtx, &xty, &prec, 1.0, &mut rng).unwrap();
            for j in 0..p {
                sum[j] += b[j];
                sq[j] += b[j] * b[j];
            }
        }
        for j in 0..p {
            let mean = sum[j] / n as f64;
            let var = sq[j] / n as f64 - mean * mean;
            assert!(mean.abs() < 3.0 / (n as f64).sqrt());
            assert!((var - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn identity_design_mean() {
        // XtX = I: mean is (I + prec)^{-1} y, check with a tiny sigma2
        let xtx = Array2::eye(2);
        let prec = ndarray::array![[1.5, -0.5], [-0.5, 1.5]];
        let y = ndarray::array![1.0, 3.0];
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let b = sample_beta_conditional(&xtx, &y, &prec, 1e-20, &mut rng).unwrap();
        // (I + prec) = [[2.5, -0.5], [-0.5, 2.5]], det = 6
        let expected = [(2.5 * 1.0 + 0.5 * 3.0) / 6.0, (0.5 * 1.0 + 2.5 * 3.0) / 6.0];
        assert!((b[0] - expected[0]).abs() < 1e-9);
        assert!((b[1] - expected[1]).abs() < 1e-9);
    }

    #[test]
    fn deterministic_given_seed() {
        let xtx = Array2::eye(3);
        let prec = tridiag(3);
        let y = ndarray::array![0.2, -1.0, 0.4];
        let a = sample_beta_conditional(&xtx, &y, &prec, 0.7, &mut ChaCha8Rng::seed_from_u64(9))
            .unwrap();
        let b = sample_beta_conditional(&xtx, &y, &prec, 0.7, &mut ChaCha8Rng::seed_from_u64(9))
            .unwrap();
        assert_eq!(a, b);
    }
}
