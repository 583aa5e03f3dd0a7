//! Lyapunov spectrum estimation for i.i.d. products of determinant-one
//! matrices, via the standard QR re-orthonormalization scheme: maintain an
//! orthonormal frame, push it through sampled matrices, and accumulate the
//! logarithms of the triangular factor's diagonal.

use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::stats::{kahan_sum, mean_ci};
use crate::words::RngStream;
use rand::Rng;
use rand_distr::StandardNormal;

// Matrices in this module's public API use nalgebra's dynamic type;
// re-exported so callers can build atoms without a direct nalgebra
// dependency.
pub use nalgebra::DMatrix;

/// A step distribution on determinant-one `d×d` matrices: either a finite
/// list of atoms or the exponential-of-Gaussian family.
#[derive(Clone, Debug)]
pub struct MatrixDistribution {
    d: usize,
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Finite(Vec<(DMatrix<f64>, f64)>),
    /// `exp(X)` with `X` a traceless matrix of i.i.d. `N(0, σ²)` entries.
    ExpGaussian { sigma: f64 },
}

/// Rescales a matrix so its determinant has absolute value one.
fn det_normalize(m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = m.nrows();
    let det = m.determinant();
    if !det.is_finite() || det.abs() < 1e-9 {
        return Err(Error::Config(format!(
            "matrix atom is singular or near-singular (det = {det:e})"
        )));
    }
    let scale = det.abs().powf(1.0 / d as f64);
    Ok(m / scale)
}

impl MatrixDistribution {
    /// A finite-atom distribution; atoms are determinant-normalized at
    /// load and probabilities must sum to one.
    pub fn finite(atoms: Vec<(DMatrix<f64>, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Config("matrix distribution needs atoms".into()));
        }
        let d = atoms[0].0.nrows();
        if d < 2 {
            return Err(Error::Config("matrices must be at least 2x2".into()));
        }
        let mut total = 0.0;
        let mut normalized = Vec::with_capacity(atoms.len());
        for (m, p) in atoms {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::Config(format!(
                    "all atoms must be {d}x{d}; got {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config("matrix atoms must be finite".into()));
            }
            if !p.is_finite() || p <= 0.0 {
                return Err(Error::Config(format!(
                    "atom probabilities must be positive; got {p}"
                )));
            }
            total += p;
            normalized.push((det_normalize(m)?, p));
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "atom probabilities must sum to 1; got {total}"
            )));
        }
        Ok(MatrixDistribution {
            d,
            kind: Kind::Finite(normalized),
        })
    }

    /// A point mass at one matrix.
    pub fn point_mass(m: DMatrix<f64>) -> Result<Self> {
        Self::finite(vec![(m, 1.0)])
    }

    /// The uniform distribution on the two standard unipotent generators
    /// of a free subgroup of `SL(2, Z)` and their inverses.
    pub fn sanov() -> Self {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        let a_inv = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 0.0, 1.0]);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 2.0, 1.0]);
        let b_inv = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -2.0, 1.0]);
        Self::finite(vec![
            (a, 0.25),
            (a_inv, 0.25),
            (b, 0.25),
            (b_inv, 0.25),
        ])
        .expect("static atoms are valid")
    }

    /// The absolutely continuous family `exp(X)`, `X` traceless Gaussian
    /// with entry scale `sigma`.
    pub fn exp_gaussian(d: usize, sigma: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::Config("matrices must be at least 2x2".into()));
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::Config(format!(
                "Gaussian scale must be positive; got {sigma}"
            )));
        }
        Ok(MatrixDistribution {
            d,
            kind: Kind::ExpGaussian { sigma },
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Whether sampling ever consults randomness: a single-atom finite
    /// distribution is deterministic, everything else is stochastic.
    pub fn is_stochastic(&self) -> bool {
        match &self.kind {
            Kind::Finite(atoms) => atoms.len() > 1,
            Kind::ExpGaussian { .. } => true,
        }
    }

    /// Draws one matrix.
    pub fn sample(&self, rng: &mut impl Rng) -> DMatrix<f64> {
        match &self.kind {
            Kind::Finite(atoms) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (m, p) in atoms {
                    acc += p;
                    if u < acc {
                        return m.clone();
                    }
                }
                atoms.last().expect("non-empty").0.clone()
            }
            Kind::ExpGaussian { sigma } => {
                let d = self.d;
                let mut x = DMatrix::<f64>::zeros(d, d);
                for i in 0..d {
                    for j in 0..d {
                        let g: f64 = rng.sample(StandardNormal);
                        x[(i, j)] = sigma * g;
                    }
                }
                let trace_share = x.trace() / d as f64;
                for i in 0..d {
                    x[(i, i)] -= trace_share;
                }
                let m = x.exp();
                // exp of a traceless matrix has determinant one up to float
                // drift; renormalize so long products stay volume-neutral.
                det_normalize(m).expect("exp image is invertible")
            }
        }
    }

    /// The distribution of inverses (for duality checks). The Gaussian
    /// family is symmetric under inversion and returned unchanged.
    pub fn inverted(&self) -> Result<Self> {
        match &self.kind {
            Kind::Finite(atoms) => {
                let inv_atoms = atoms
                    .iter()
                    .map(|(m, p)| {
                        m.clone()
                            .try_inverse()
                            .map(|mi| (mi, *p))
                            .ok_or_else(|| Error::Config("atom is not invertible".into()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::finite(inv_atoms)
            }
            Kind::ExpGaussian { .. } => Ok(self.clone()),
        }
    }

    /// Every atom conjugated by a fixed invertible matrix; Lyapunov
    /// exponents are invariant under this (finite-atom families only).
    pub fn conjugated(&self, c: &DMatrix<f64>) -> Result<Self> {
        let ci = c
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Config("conjugator is not invertible".into()))?;
        match &self.kind {
            Kind::Finite(atoms) => Self::finite(
                atoms
                    .iter()
                    .map(|(m, p)| (c * m * &ci, *p))
                    .collect(),
            ),
            Kind::ExpGaussian { .. } => Err(Error::Config(
                "conjugation is only defined for finite-atom families".into(),
            )),
        }
    }
}

/// Estimated Lyapunov exponents, sorted non-increasing, with per-exponent
/// 95% confidence halfwidths from replica spread.
#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovSpectrum {
    pub exponents: Vec<f64>,
    pub ci_halfwidths: Vec<f64>,
    pub steps_used: u64,
    pub replicas: u64,
}

impl LyapunovSpectrum {
    pub fn d(&self) -> usize {
        self.exponents.len()
    }

    /// Exponents shifted to sum exactly to zero — the projection onto the
    /// determinant-one constraint, for feeding spectrum assembly.
    pub fn recentered(&self) -> Vec<f64> {
        let mean = kahan_sum(self.exponents.iter().copied()) / self.d() as f64;
        self.exponents.iter().map(|x| x - mean).collect()
    }
}

/// Runs one replica of the QR scheme and returns its exponent vector.
fn qr_replica(
    dist: &MatrixDistribution,
    steps: u64,
    qr_period: u64,
    burn_in: u64,
    stream: &RngStream,
    replica: u64,
) -> Result<Vec<f64>> {
    let d = dist.d();
    let mut rng = stream.offset(replica).rng();
    let mut frame = DMatrix::<f64>::identity(d, d);
    let mut acc = vec![0.0; d];
    let mut phase = |from: u64, to: u64, record: bool, acc: &mut Vec<f64>| -> Result<()> {
        let mut t = from;
        while t < to {
            let block = qr_period.min(to - t);
            let mut b = frame.clone();
            for _ in 0..block {
                b = dist.sample(&mut rng) * b;
            }
            let qr = nalgebra::linalg::QR::new(b);
            let r = qr.r();
            for i in 0..d {
                let x = r[(i, i)].abs();
                if !x.is_finite() || x == 0.0 {
                    return Err(Error::Internal(format!(
                        "replica {replica}: QR diagonal became {x} near step {t}; \
                         shorten qr_period or rescale the distribution"
                    )));
                }
                if record {
                    acc[i] += x.ln();
                }
            }
            frame = qr.q();
            t += block;
        }
        Ok(())
    };
    phase(0, burn_in, false, &mut acc)?;
    phase(burn_in, steps, true, &mut acc)?;
    let measured = (steps - burn_in) as f64;
    Ok(acc.into_iter().map(|a| a / measured).collect())
}

/// Estimates the Lyapunov spectrum of i.i.d. products from `dist` with
/// `replicas` independent runs of `steps` steps each, re-orthonormalizing
/// every `qr_period` steps and discarding the first `burn_in` steps of
/// each run. Replica `r` draws from `stream.offset(r)`, so results are
/// reproducible and independent of scheduling.
pub fn lyapunov_qr(
    dist: &MatrixDistribution,
    steps: u64,
    qr_period: u64,
    replicas: u64,
    burn_in: u64,
    stream: &RngStream,
) -> Result<LyapunovSpectrum> {
    if qr_period == 0 || steps < qr_period {
        return Err(Error::Config(format!(
            "need steps >= qr_period >= 1; got steps {steps}, period {qr_period}"
        )));
    }
    if replicas == 0 {
        return Err(Error::Config("need at least one replica".into()));
    }
    if burn_in >= steps {
        return Err(Error::Config(format!(
            "burn-in {burn_in} must be smaller than steps {steps}"
        )));
    }
    let d = dist.d();
    let per_replica = map_indexed(replicas as usize, |r| {
        qr_replica(dist, steps, qr_period, burn_in, stream, r as u64)
    })
    .into_iter()
    .collect::<Result<Vec<Vec<f64>>>>()?;
    let mut means = vec![0.0; d];
    let mut cis = vec![0.0; d];
    for i in 0..d {
        let column: Vec<f64> = per_replica.iter().map(|v| v[i]).collect();
        let (m, ci) = mean_ci(&column);
        means[i] = m;
        cis[i] = ci;
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| means[b].partial_cmp(&means[a]).expect("finite exponents"));
    Ok(LyapunovSpectrum {
        exponents: order.iter().map(|&i| means[i]).collect(),
        ci_halfwidths: order.iter().map(|&i| cis[i]).collect(),
        steps_used: steps,
        replicas,
    })
}

/// Whether the estimated exponents are consistent with the determinant-one
/// constraint: `|Σ λ_i|` within three combined halfwidths (plus a small
/// deterministic floor).
pub fn check_sl_constraint(spec: &LyapunovSpectrum) -> bool {
    let sum = kahan_sum(spec.exponents.iter().copied());
    let combined = spec
        .ci_halfwidths
        .iter()
        .map(|c| c * c)
        .sum::<f64>()
        .sqrt();
    sum.abs() <= 3.0 * combined + 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn diag(entries: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(entries))
    }

    #[test]
    fn deterministic_diagonal_is_exact() {
        let dist = MatrixDistribution::point_mass(diag(&[2.0, 0.5])).unwrap();
        let spec = lyapunov_qr(&dist, 200, 1, 3, 20, &RngStream::new(1, 0)).unwrap();
        assert_abs_diff_eq!(spec.exponents[0], (2.0f64).ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(spec.exponents[1], -(2.0f64).ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(spec.ci_halfwidths[0], 0.0, epsilon = 1e-12);
        assert!(check_sl_constraint(&spec));
    }

    #[test]
    fn identity_gives_zero_spectrum() {
        let dist = MatrixDistribution::point_mass(DMatrix::identity(3, 3)).unwrap();
        let spec = lyapunov_qr(&dist, 100, 4, 2, 10, &RngStream::new(2, 0)).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(spec.exponents[i], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn triangular_point_mass_reads_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 0.5]);
        let dist = MatrixDistribution::point_mass(m).unwrap();
        let spec = lyapunov_qr(&dist, 400, 1, 2, 40, &RngStream::new(3, 0)).unwrap();
        assert_abs_diff_eq!(spec.exponents[0], (2.0f64).ln(), epsilon = 1e-6);
        assert_abs_diff_eq!(spec.exponents[1], -(2.0f64).ln(), epsilon = 1e-6);
    }

    #[test]
    fn unipotent_pair_has_positive_top_exponent() {
        let dist = MatrixDistribution::sanov();
        let spec = lyapunov_qr(&dist, 30_000, 1, 8, 3_000, &RngStream::new(5, 0)).unwrap();
        assert!(
            spec.exponents[0] > 3.0 * spec.ci_halfwidths[0],
            "top exponent {} ± {} must exclude 0",
            spec.exponents[0],
            spec.ci_halfwidths[0]
        );
        assert!(check_sl_constraint(&spec));
        assert!(spec.exponents[0] >= spec.exponents[1]);
    }

    #[test]
    fn estimates_are_replica_deterministic() {
        let dist = MatrixDistribution::sanov();
        let a = lyapunov_qr(&dist, 2_000, 2, 4, 200, &RngStream::new(9, 1)).unwrap();
        let b = lyapunov_qr(&dist, 2_000, 2, 4, 200, &RngStream::new(9, 1)).unwrap();
        assert_eq!(a, b);
        let c = lyapunov_qr(&dist, 2_000, 2, 4, 200, &RngStream::new(9, 2)).unwrap();
        assert_ne!(a.exponents, c.exponents);
    }

    #[test]
    fn deterministic_inversion_duality_is_exact() {
        let dist = MatrixDistribution::point_mass(diag(&[4.0, 2.0, 0.125])).unwrap();
        let spec = lyapunov_qr(&dist, 300, 1, 2, 30, &RngStream::new(7, 0)).unwrap();
        let inv = lyapunov_qr(
            &dist.inverted().unwrap(),
            300,
            1,
            2,
            30,
            &RngStream::new(7, 1),
        )
        .unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(
                inv.exponents[i],
                -spec.exponents[2 - i],
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn stochastic_inversion_duality_within_ci() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 2.0, 1.0]);
        let dist = MatrixDistribution::finite(vec![(a, 0.8), (b, 0.2)]).unwrap();
        let spec = lyapunov_qr(&dist, 20_000, 1, 6, 2_000, &RngStream::new(11, 0)).unwrap();
        let inv = lyapunov_qr(
            &dist.inverted().unwrap(),
            20_000,
            1,
            6,
            2_000,
            &RngStream::new(11, 1),
        )
        .unwrap();
        for i in 0..2 {
            let slack = 3.0 * (spec.ci_halfwidths[1 - i] + inv.ci_halfwidths[i]) + 0.01;
            assert!(
                (inv.exponents[i] + spec.exponents[1 - i]).abs() < slack,
                "duality violated: {:?} vs {:?}",
                inv.exponents,
                spec.exponents
            );
        }
    }

    #[test]
    fn conjugation_leaves_exponents_invariant() {
        let dist = MatrixDistribution::sanov();
        let c = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let conj = dist.conjugated(&c).unwrap();
        let s1 = lyapunov_qr(&dist, 20_000, 1, 6, 2_000, &RngStream::new(13, 0)).unwrap();
        let s2 = lyapunov_qr(&conj, 20_000, 1, 6, 2_000, &RngStream::new(13, 1)).unwrap();
        for i in 0..2 {
            let slack = 3.0 * (s1.ci_halfwidths[i] + s2.ci_halfwidths[i]) + 0.01;
            assert!(
                (s1.exponents[i] - s2.exponents[i]).abs() < slack,
                "conjugation shifted exponent {i}: {:?} vs {:?}",
                s1.exponents,
                s2.exponents
            );
        }
    }

    #[test]
    fn gaussian_family_obeys_zero_sum() {
        let dist = MatrixDistribution::exp_gaussian(3, 0.5).unwrap();
        let spec = lyapunov_qr(&dist, 8_000, 1, 4, 800, &RngStream::new(17, 0)).unwrap();
        assert!(check_sl_constraint(&spec), "spectrum {:?}", spec.exponents);
        assert!(spec.exponents[0] >= spec.exponents[1]);
        assert!(spec.exponents[1] >= spec.exponents[2]);
        let recentered = spec.recentered();
        assert_abs_diff_eq!(kahan_sum(recentered.iter().copied()), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn perturbed_spectrum_fails_the_constraint() {
        let spec = LyapunovSpectrum {
            exponents: vec![0.5, 0.0],
            ci_halfwidths: vec![1e-4, 1e-4],
            steps_used: 1000,
            replicas: 4,
        };
        assert!(!check_sl_constraint(&spec));
    }

    #[test]
    fn invalid_configurations_are_rejected() {
        assert!(MatrixDistribution::finite(vec![]).is_err());
        assert!(
            MatrixDistribution::finite(vec![(DMatrix::identity(2, 2), 0.5)]).is_err(),
            "probabilities must sum to 1"
        );
        assert!(MatrixDistribution::point_mass(DMatrix::zeros(2, 2)).is_err());
        assert!(MatrixDistribution::point_mass(DMatrix::identity(1, 1)).is_err());
        assert!(MatrixDistribution::exp_gaussian(3, 0.0).is_err());
        let dist = MatrixDistribution::sanov();
        let s = RngStream::new(1, 0);
        assert!(lyapunov_qr(&dist, 0, 1, 2, 0, &s).is_err());
        assert!(lyapunov_qr(&dist, 10, 20, 2, 0, &s).is_err());
        assert!(lyapunov_qr(&dist, 10, 1, 0, 0, &s).is_err());
        assert!(lyapunov_qr(&dist, 10, 1, 2, 10, &s).is_err());
    }

    #[test]
    fn mixed_dimension_atoms_are_rejected() {
        let atoms = vec![
            (DMatrix::identity(2, 2), 0.5),
            (DMatrix::identity(3, 3), 0.5),
        ];
        assert!(MatrixDistribution::finite(atoms).is_err());
    }
}
