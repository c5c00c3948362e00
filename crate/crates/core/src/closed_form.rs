//! Analytic oracles: exact Bernoulli numbers for GHZ correlators and the
//! two-dimensional bond MPS of `exp(-i t Σ X_i X_{i+1})|0…0⟩`.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};
use crate::partitions::binomial;
use crate::quantum::CMatrix;

/// Largest index accepted by [`bernoulli`].
pub const MAX_BERNOULLI_INDEX: usize = 60;

/// Largest `n` accepted by [`xx_un_by_counting`].
pub const MAX_COUNTING_N: usize = 25;

/// Exact reduced fraction with a positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self> {
        let d = denom.into();
        if d.is_zero() {
            return invalid("zero denominator");
        }
        Ok(Self(BigRational::new(numer.into(), d)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn to_f64(&self) -> f64 {
        // ratio of large integers; to_f64 on BigRational handles the scaling
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn abs(&self) -> Self {
        Self(self.0.abs())
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for ExactRational {
    fn from(r: BigRational) -> Self {
        Self(r)
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

/// `B_n` by the Akiyama–Tanigawa recurrence (`B_1 = +1/2` in this convention).
pub fn bernoulli(n: usize) -> Result<ExactRational> {
    if n > MAX_BERNOULLI_INDEX {
        return invalid(format!("Bernoulli index {n} exceeds {MAX_BERNOULLI_INDEX}"));
    }
    let mut a: Vec<BigRational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        a.push(BigRational::new(BigInt::one(), BigInt::from(m + 1)));
        for j in (1..=m).rev() {
            let diff = &a[j - 1] - &a[j];
            a[j - 1] = diff * BigInt::from(j);
        }
    }
    Ok(ExactRational(a.swap_remove(0)))
}

/// `u_n(Z, …, Z)` on GHZ(n) as an exact rational: 0 for odd `n`,
/// `2^n (2^n − 1) B_n / n` for even `n`.
pub fn ghz_un_rational(n: usize) -> Result<ExactRational> {
    if n < 2 {
        return invalid("GHZ correlator needs n >= 2");
    }
    if n % 2 == 1 {
        return Ok(ExactRational::zero());
    }
    let b = bernoulli(n)?;
    let two_n = BigInt::one() << n;
    let factor = BigRational::new(&two_n * (&two_n - BigInt::one()), BigInt::from(n));
    Ok(ExactRational(factor * b.0))
}

pub fn ghz_un_exact(n: usize) -> Result<f64> {
    Ok(ghz_un_rational(n)?.to_f64())
}

/// Magnitude estimate from `|B_n| ≈ 4 √(π n / 2) (n / 2πe)^n`, even `n >= 10`.
pub fn ghz_un_asymptotic(n: usize) -> Result<f64> {
    if n % 2 == 1 || n < 10 {
        return invalid(format!("asymptotic form needs even n >= 10, got {n}"));
    }
    let nf = n as f64;
    let pi = std::f64::consts::PI;
    let e = std::f64::consts::E;
    let log_b = 4f64.ln() + 0.5 * (pi * nf / 2.0).ln() + nf * (nf / (2.0 * pi * e)).ln();
    let log_prefactor = nf * 2f64.ln() + (2f64.powf(nf) - 1.0).ln() - nf.ln();
    Ok((log_b + log_prefactor).exp())
}

/// Site tensors of the XX-chain state at time `t`.
#[derive(Debug, Clone)]
pub struct XXChainMps {
    pub t: f64,
    pub l: [CMatrix; 2],
    pub a: [CMatrix; 2],
    pub r: [CMatrix; 2],
}

impl XXChainMps {
    pub fn new(t: f64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let c = Complex64::new(t.cos(), 0.0);
        let s = Complex64::new(0.0, -t.sin());
        Self {
            t,
            l: [
                CMatrix::from_rows(&[&[one, zero]]),
                CMatrix::from_rows(&[&[zero, one]]),
            ],
            a: [
                CMatrix::from_rows(&[&[c, zero], &[zero, s]]),
                CMatrix::from_rows(&[&[zero, c], &[s, zero]]),
            ],
            r: [
                CMatrix::from_rows(&[&[c], &[zero]]),
                CMatrix::from_rows(&[&[zero], &[s]]),
            ],
        }
    }

    /// Deviations of `Σ L†L`, `Σ A†A` from the identity and of `Σ R†R` from 1.
    pub fn canonical_errors(&self) -> (f64, f64, f64) {
        let gram = |ms: &[CMatrix; 2]| &ms[0].adjoint().matmul(&ms[0]) + &ms[1].adjoint().matmul(&ms[1]);
        let l = gram(&self.l).max_abs_diff(&CMatrix::identity(2));
        let a = gram(&self.a).max_abs_diff(&CMatrix::identity(2));
        let r = gram(&self.r).max_abs_diff(&CMatrix::identity(1));
        (l, a, r)
    }

    /// `L_{b_0} A_{b_1} ⋯ A_{b_{n-2}} R_{b_{n-1}}`.
    pub fn amplitude(&self, bits: &[u8]) -> Result<Complex64> {
        let n = bits.len();
        if n < 2 {
            return invalid("MPS amplitude needs at least two sites");
        }
        if bits.iter().any(|&b| b > 1) {
            return invalid("bits must be 0 or 1");
        }
        let mut row = self.l[bits[0] as usize].clone();
        for &b in &bits[1..n - 1] {
            row = row.matmul(&self.a[b as usize]);
        }
        Ok(row.matmul(&self.r[bits[n - 1] as usize]).get(0, 0))
    }
}

/// Amplitude of `bits` in `exp(-i t Σ X_i X_{i+1})|0…0⟩`.
pub fn xx_mps_amplitude(bits: &[u8], t: f64) -> Result<Complex64> {
    XXChainMps::new(t).amplitude(bits)
}

/// `⟨Π_{k∈pattern} Z_k⟩ = cos(2t)^b`, `b` the number of chain bonds joining a
/// pattern site to a non-pattern site.
pub fn xx_disconnected_z(pattern: &[usize], n: usize, t: f64) -> Result<f64> {
    if pattern.is_empty() {
        return invalid("pattern must be nonempty");
    }
    if let Some(&s) = pattern.iter().find(|&&s| s >= n) {
        return invalid(format!("site {s} outside a chain of {n}"));
    }
    let mut inside = vec![false; n];
    for &s in pattern {
        inside[s] = true;
    }
    let boundaries = inside.windows(2).filter(|w| w[0] != w[1]).count();
    Ok((2.0 * t).cos().powi(boundaries as i32))
}

/// `[sin²(2t)]^(n−1)`.
pub fn xx_un_closed_form(n: usize, t: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    (2.0 * t).sin().powi(2).powi(n as i32 - 1)
}

/// `Σ_v C(n−1, v) (−cos²2t)^v`, summed exactly over the rational value of
/// the rounded `−cos²2t` (the alternating terms cancel to many digits).
pub fn xx_un_by_counting(n: usize, t: f64) -> Result<f64> {
    if n == 0 || n > MAX_COUNTING_N {
        return invalid(format!("counting form needs 1 <= n <= {MAX_COUNTING_N}"));
    }
    let x = BigRational::from_float(-(2.0 * t).cos().powi(2)).expect("finite");
    let mut power = BigRational::one();
    let mut sum = BigRational::zero();
    for v in 0..n {
        sum += &power * BigInt::from(binomial(n as u64 - 1, v as u64));
        power *= &x;
    }
    Ok(sum.to_f64().unwrap_or(f64::NAN))
}
