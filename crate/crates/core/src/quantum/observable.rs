use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::matrix::CMatrix;
use super::state::{apply_local, check_site_list, site_mask, StateVector};
use crate::error::{invalid, Error, Result};

/// Hermiticity tolerance for dense observables.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> CMatrix {
        let (o, l, i) = (
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
        );
        match self {
            Pauli::I => CMatrix::identity(2),
            Pauli::X => CMatrix::from_rows(&[&[o, l], &[l, o]]),
            Pauli::Y => CMatrix::from_rows(&[&[o, -i], &[i, o]]),
            Pauli::Z => CMatrix::from_rows(&[&[l, o], &[o, -l]]),
        }
    }

    /// `(x, z)` bits of the symplectic representation (`Y` is `(1, 1)`).
    pub fn symplectic(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c.to_ascii_uppercase() {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => invalid(format!("'{other}' is not a Pauli letter")),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Scalar `i^k` in front of a Pauli string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn value(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// A phase times a tensor product of single-site Paulis on a declared support.
///
/// Identity letters are kept: they belong to the support even though they act
/// trivially.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    support: Vec<usize>,
    letters: Vec<Pauli>,
    phase: Phase,
}

impl PauliString {
    pub fn new(support: Vec<usize>, letters: Vec<Pauli>, phase: Phase) -> Result<Self> {
        if support.len() != letters.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                found: letters.len(),
            });
        }
        if support.is_empty() {
            return invalid("a Pauli string needs a nonempty support");
        }
        check_site_list(64, &support)?;
        Ok(Self {
            support,
            letters,
            phase,
        })
    }

    pub fn single(site: usize, letter: Pauli) -> Self {
        Self {
            support: vec![site],
            letters: vec![letter],
            phase: Phase::ONE,
        }
    }

    /// Parses a string such as `"ZXIZ"` acting on sites `0..len`, with an
    /// optional leading sign `+`, `-`, `i`, `-i`.
    pub fn parse(s: &str) -> Result<Self> {
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MINUS_I, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (Phase::I, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (Phase::I, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (Phase::ONE, rest)
        } else {
            (Phase::ONE, s)
        };
        let letters = body.chars().map(Pauli::from_char).collect::<Result<Vec<_>>>()?;
        Self::new((0..letters.len()).collect(), letters, phase)
    }

    /// Builds a string from `(site, letter)` pairs.
    pub fn from_pairs(pairs: &[(usize, Pauli)]) -> Result<Self> {
        Self::new(
            pairs.iter().map(|p| p.0).collect(),
            pairs.iter().map(|p| p.1).collect(),
            Phase::ONE,
        )
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn letter_at(&self, site: usize) -> Pauli {
        self.support
            .iter()
            .position(|&s| s == site)
            .map_or(Pauli::I, |k| self.letters[k])
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    pub fn matrix(&self) -> CMatrix {
        let m = self
            .letters
            .iter()
            .fold(CMatrix::identity(1), |acc, l| acc.kron(&l.matrix()));
        m.scale(self.phase.value())
    }

    /// Applies the string to full amplitudes of an `n`-site state.
    pub(crate) fn apply(&self, n: usize, amps: &[Complex64]) -> Vec<Complex64> {
        let mut flip = 0usize;
        let mut sign_mask = 0usize;
        let mut y_count = 0u8;
        for (&s, &l) in self.support.iter().zip(&self.letters) {
            let (x, z) = l.symplectic();
            if x {
                flip |= site_mask(n, s);
            }
            if z {
                sign_mask |= site_mask(n, s);
            }
            if l == Pauli::Y {
                y_count += 1;
            }
        }
        // Y = i X Z, so the string is phase · i^{#Y} · X^flip Z^sign_mask
        let prefactor = (self.phase * Phase(y_count % 4)).value();
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        for (idx, &a) in amps.iter().enumerate() {
            let v = if (idx & sign_mask).count_ones() % 2 == 1 { -a } else { a };
            out[idx ^ flip] = prefactor * v;
        }
        out
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PauliString::parse(s)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.phase.0 {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{sign}")?;
        for (s, l) in self.support.iter().zip(&self.letters) {
            write!(f, "{}{}", l.as_char(), s)?;
        }
        Ok(())
    }
}

/// Operator with a declared support: either a Pauli string or a dense
/// Hermitian matrix of dimension `2^|support|`.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    Pauli(PauliString),
    Dense { support: Vec<usize>, matrix: CMatrix },
}

impl Observable {
    pub fn pauli(site: usize, letter: Pauli) -> Self {
        Observable::Pauli(PauliString::single(site, letter))
    }

    pub fn x(site: usize) -> Self {
        Self::pauli(site, Pauli::X)
    }

    pub fn y(site: usize) -> Self {
        Self::pauli(site, Pauli::Y)
    }

    pub fn z(site: usize) -> Self {
        Self::pauli(site, Pauli::Z)
    }

    /// Identity acting on `support`.
    pub fn identity(support: Vec<usize>) -> Result<Self> {
        let letters = vec![Pauli::I; support.len()];
        Ok(Observable::Pauli(PauliString::new(support, letters, Phase::ONE)?))
    }

    /// Dense observable; the matrix must be Hermitian.
    pub fn dense(support: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        if support.is_empty() {
            return invalid("an observable needs a nonempty support");
        }
        check_site_list(64, &support)?;
        let dim = 1usize << support.len();
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.rows(),
            });
        }
        if !matrix.is_hermitian(HERMITIAN_TOLERANCE) {
            return invalid("dense observable is not Hermitian");
        }
        let obs = Observable::Dense { support, matrix };
        obs.warn_if_above_unit_norm();
        Ok(obs)
    }

    pub fn support(&self) -> &[usize] {
        match self {
            Observable::Pauli(p) => p.support(),
            Observable::Dense { support, .. } => support,
        }
    }

    pub fn support_mask(&self) -> u64 {
        self.support().iter().fold(0, |m, &s| m | (1 << s))
    }

    /// Local matrix in the order of [`Observable::support`].
    pub fn matrix(&self) -> CMatrix {
        match self {
            Observable::Pauli(p) => p.matrix(),
            Observable::Dense { matrix, .. } => matrix.clone(),
        }
    }

    pub fn is_hermitian(&self) -> bool {
        match self {
            Observable::Pauli(p) => p.is_hermitian(),
            Observable::Dense { matrix, .. } => matrix.is_hermitian(HERMITIAN_TOLERANCE),
        }
    }

    pub fn operator_norm(&self) -> f64 {
        match self {
            Observable::Pauli(_) => 1.0,
            Observable::Dense { matrix, .. } => matrix.spectral_norm(),
        }
    }

    /// Observables above unit norm are allowed; the multipartite envelope
    /// presumes unit norm, so they are reported.
    pub fn warn_if_above_unit_norm(&self) -> bool {
        let norm = self.operator_norm();
        let above = norm > 1.0 + 1e-12;
        if above {
            log::warn!(
                "observable on sites {:?} has operator norm {norm:.6} > 1; \
                 Lieb-Robinson envelopes assume unit norm",
                self.support()
            );
        }
        above
    }

    pub(crate) fn apply(&self, n: usize, amps: &[Complex64]) -> Vec<Complex64> {
        match self {
            Observable::Pauli(p) => p.apply(n, amps),
            Observable::Dense { support, matrix } => apply_local(n, amps, support, matrix),
        }
    }

    /// Product of observables with pairwise disjoint supports.
    ///
    /// Pauli factors stay a Pauli string (sorted by site); any dense factor
    /// makes the result dense over the concatenated support.
    pub fn product(factors: &[Observable]) -> Result<Observable> {
        if factors.is_empty() {
            return invalid("empty observable product");
        }
        check_disjoint(factors)?;
        if factors.len() == 1 {
            return Ok(factors[0].clone());
        }
        if factors.iter().all(|f| matches!(f, Observable::Pauli(_))) {
            let mut pairs: Vec<(usize, Pauli)> = Vec::new();
            let mut phase = Phase::ONE;
            for f in factors {
                if let Observable::Pauli(p) = f {
                    pairs.extend(p.support.iter().copied().zip(p.letters.iter().copied()));
                    phase = phase * p.phase;
                }
            }
            pairs.sort_by_key(|p| p.0);
            return Ok(Observable::Pauli(PauliString::from_pairs(&pairs)?.with_phase(phase)));
        }
        let support: Vec<usize> = factors.iter().flat_map(|f| f.support().iter().copied()).collect();
        let matrix = factors
            .iter()
            .fold(CMatrix::identity(1), |acc, f| acc.kron(&f.matrix()));
        Ok(Observable::Dense { support, matrix })
    }
}

impl From<PauliString> for Observable {
    fn from(p: PauliString) -> Self {
        Observable::Pauli(p)
    }
}

/// Errors unless the supports are nonempty and pairwise disjoint.
pub fn check_disjoint(observables: &[Observable]) -> Result<()> {
    let mut used = 0u64;
    for obs in observables {
        let mask = obs.support_mask();
        if obs.support().is_empty() {
            return invalid("observable with empty support");
        }
        if used & mask != 0 {
            return invalid("observable supports overlap");
        }
        used |= mask;
    }
    Ok(())
}

/// `⟨ψ| A₁ A₂ … A_k |ψ⟩` for observables with pairwise disjoint supports.
pub fn expectation(state: &StateVector, observables: &[Observable]) -> Result<Complex64> {
    check_disjoint(observables)?;
    for obs in observables {
        if let Some(&bad) = obs.support().iter().find(|&&s| s >= state.n()) {
            return invalid(format!("site {bad} outside a {}-site state", state.n()));
        }
    }
    let n = state.n();
    let mut phi = state.amplitudes().to_vec();
    for obs in observables.iter().rev() {
        phi = obs.apply(n, &phi);
    }
    Ok(state
        .amplitudes()
        .iter()
        .zip(&phi)
        .map(|(a, b)| a.conj() * b)
        .sum())
}
