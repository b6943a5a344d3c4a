//! Synthetic problem instances `A = U diag(sigma) V^T`, `b = A x_true + eta g`.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sparse_lsq_core::linalg::orthonormalize_columns;
use sparse_lsq_core::rng::seeded_stream;
use sparse_lsq_core::{DenseMatrix, Vector};

use crate::error::{Error, Result};

/// Singular values of the generated matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spectrum {
    /// `sigma_i = ratio^(i-1)`, `i = 1..min(m, n)`.
    Geometric(f64),
    /// Leading singular values; the remainder are zero.
    Explicit(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub m: usize,
    pub n: usize,
    /// Nonzeros of `x_true`.
    pub k_true: usize,
    pub spectrum: Spectrum,
    /// Standard deviation of the Gaussian noise added to `b`.
    pub eta: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Parses `key=value` pairs separated by commas.
    ///
    /// Keys: `m`, `n` (required), `k_true` (default 3, capped at `n`),
    /// `gamma` (default 0.5) or `spectrum` (values separated by `:`), `eta`
    /// (default 0) and `seed` (default 0).
    pub fn parse(text: &str) -> Result<Self> {
        let mut m = None;
        let mut n = None;
        let mut k_true = None;
        let mut gamma = None;
        let mut explicit = None;
        let mut eta = 0.0;
        let mut seed = 0;
        for pair in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("generator field `{pair}` is not key=value")))?;
            let bad = || Error::Usage(format!("generator field `{key}` has invalid value `{value}`"));
            match key.trim() {
                "m" => m = Some(value.parse().map_err(|_| bad())?),
                "n" => n = Some(value.parse().map_err(|_| bad())?),
                "k_true" => k_true = Some(value.parse().map_err(|_| bad())?),
                "gamma" => gamma = Some(value.parse::<f64>().map_err(|_| bad())?),
                "spectrum" => {
                    explicit = Some(
                        value
                            .split(':')
                            .map(|t| t.trim().parse::<f64>())
                            .collect::<Result<Vec<_>, _>>()
                            .map_err(|_| bad())?,
                    )
                }
                "eta" => eta = value.parse().map_err(|_| bad())?,
                "seed" => seed = value.parse().map_err(|_| bad())?,
                other => return Err(Error::Usage(format!("unknown generator field `{other}`"))),
            }
        }
        let m = m.ok_or_else(|| Error::Usage("generator needs m".into()))?;
        let n = n.ok_or_else(|| Error::Usage("generator needs n".into()))?;
        let spectrum = match (gamma, explicit) {
            (Some(_), Some(_)) => return Err(Error::Usage("give either gamma or spectrum, not both".into())),
            (_, Some(list)) => Spectrum::Explicit(list),
            (g, None) => Spectrum::Geometric(g.unwrap_or(0.5)),
        };
        let spec = Self { m, n, k_true: k_true.unwrap_or(3).min(n), spectrum, eta, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 || self.n < 2 {
            return Err(Error::Usage("generator needs m >= 2 and n >= 2".into()));
        }
        if self.k_true == 0 || self.k_true > self.n {
            return Err(Error::Usage("k_true must lie in 1..=n".into()));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::Usage("eta must be finite and non-negative".into()));
        }
        match &self.spectrum {
            Spectrum::Geometric(g) if !(*g > 0.0 && *g <= 1.0) => Err(Error::Usage("gamma must lie in (0, 1]".into())),
            Spectrum::Explicit(list)
                if list.is_empty()
                    || list.len() > self.m.min(self.n)
                    || list.iter().any(|s| !(s.is_finite() && *s >= 0.0)) =>
            {
                Err(Error::Usage("spectrum needs 1..=min(m, n) finite non-negative values".into()))
            }
            _ => Ok(()),
        }
    }

    /// Singular values in the order they are placed on the diagonal.
    pub fn singular_values(&self) -> Vec<f64> {
        match &self.spectrum {
            Spectrum::Geometric(g) => (0..self.m.min(self.n)).map(|i| g.powi(i as i32)).collect(),
            Spectrum::Explicit(list) => list.clone(),
        }
    }
}

/// What was generated besides `A` and `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub spec: SyntheticSpec,
    pub singular_values: Vec<f64>,
    /// Nonzeros of `x_true` as `(index, value)`, indices increasing.
    pub x_true: Vec<(usize, f64)>,
}

pub struct Instance {
    pub a: DenseMatrix,
    pub b: Vector,
    pub metadata: Metadata,
}

fn gaussian<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    DenseMatrix::new(rows, cols, data).expect("Gaussian samples are finite")
}

/// Draws an instance. Singular vectors are Haar distributed (Gram-Schmidt on
/// Gaussian matrices); `x_true` has `k_true` Gaussian entries at uniformly
/// chosen positions.
pub fn generate(spec: &SyntheticSpec) -> Result<Instance> {
    spec.validate()?;
    let mut rng = seeded_stream(spec.seed);
    let sigma = spec.singular_values();
    let p = sigma.len();
    let mut u = orthonormalize_columns(&gaussian(spec.m, p, &mut rng))?;
    let v = orthonormalize_columns(&gaussian(spec.n, p, &mut rng))?;
    for i in 0..spec.m {
        for (j, s) in sigma.iter().enumerate() {
            u[(i, j)] *= s;
        }
    }
    let a = u.matmul(&v.transpose())?;

    let mut support = sample(&mut rng, spec.n, spec.k_true).into_vec();
    support.sort_unstable();
    let mut x = vec![0.0; spec.n];
    let x_true: Vec<(usize, f64)> = support
        .into_iter()
        .map(|i| {
            let value: f64 = rng.sample(StandardNormal);
            x[i] = value;
            (i, value)
        })
        .collect();
    let mut b = a.matvec(&x)?;
    if spec.eta > 0.0 {
        for bi in &mut b {
            *bi += spec.eta * rng.sample::<f64, _>(StandardNormal);
        }
    }
    Ok(Instance { a, b: Vector::new(b)?, metadata: Metadata { spec: spec.clone(), singular_values: sigma, x_true } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sparse_lsq_core::linalg::{residual_norm, svd_default};

    #[test]
    fn parse_defaults_and_errors() {
        let s = SyntheticSpec::parse("m=30,n=20,gamma=0.5").unwrap();
        assert_eq!((s.m, s.n, s.k_true, s.eta, s.seed), (30, 20, 3, 0.0, 0));
        assert_eq!(s.spectrum, Spectrum::Geometric(0.5));
        let s = SyntheticSpec::parse("m=3, n=3, spectrum=4:2:1, seed=9").unwrap();
        assert_eq!(s.spectrum, Spectrum::Explicit(vec![4.0, 2.0, 1.0]));
        for bad in
            ["m=1,n=3", "n=3", "m=3,n=3,gamma=1.5", "m=3,n=3,foo=1", "m=3,n=3,eta=-1", "m=3,n=3,gamma=0.5,spectrum=1"]
        {
            assert!(SyntheticSpec::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn unit_spectrum() {
        let inst = generate(&SyntheticSpec::parse("m=6,n=4,gamma=1").unwrap()).unwrap();
        for s in svd_default(&inst.a).unwrap().sigma() {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn explicit_spectrum_round_trips() {
        let inst = generate(&SyntheticSpec::parse("m=3,n=3,spectrum=4:2:1,seed=5").unwrap()).unwrap();
        let sigma = svd_default(&inst.a).unwrap().sigma().to_vec();
        for (s, t) in sigma.iter().zip([4.0, 2.0, 1.0]) {
            assert!((s - t).abs() < 1e-8);
        }
    }

    #[test]
    fn noiseless_right_hand_side_is_exact() {
        let inst = generate(&SyntheticSpec::parse("m=10,n=8,k_true=2,seed=3").unwrap()).unwrap();
        let mut x = vec![0.0; 8];
        for &(i, v) in &inst.metadata.x_true {
            x[i] = v;
        }
        assert_eq!(inst.metadata.x_true.len(), 2);
        assert!(residual_norm(&inst.a, &x, &inst.b).unwrap() < 1e-12);
    }

    #[test]
    fn same_seed_same_instance() {
        let spec = SyntheticSpec::parse("m=7,n=5,eta=0.1,seed=11").unwrap();
        let (p, q) = (generate(&spec).unwrap(), generate(&spec).unwrap());
        assert_eq!((p.a, p.b), (q.a, q.b));
    }
}
