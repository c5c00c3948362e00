use num_complex::Complex64;

use super::matrix::CMatrix;
use super::observable::Pauli;
use super::state::{apply_local, check_site_list, StateVector};
use crate::error::{invalid, Error, Result};
use crate::geometry::Geometry;

/// Largest system for which a non-commuting Hamiltonian is exponentiated densely.
pub const DENSE_EXPONENTIAL_LIMIT: usize = 10;

/// Two terms commute when the Frobenius norm of their commutator is below this.
pub const COMMUTATOR_TOLERANCE: f64 = 1e-12;

/// One coupling term `J · h` where `h` is a Hermitian operator on one or two sites.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coupling: f64,
    pub sites: Vec<usize>,
    pub op: CMatrix,
}

/// `H = Σ J_k h_k` over one- and two-site Hermitian terms with `|J_k| <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n: usize,
    terms: Vec<Term>,
}

/// `I + Z⊗I + I⊗Z − Z⊗Z`; evolving for `π/4` implements a controlled-Z up
/// to a global phase.
pub fn h_cz_matrix() -> CMatrix {
    let z = Pauli::Z.matrix();
    let id = CMatrix::identity(2);
    let zi = z.kron(&id);
    let iz = id.kron(&z);
    let zz = z.kron(&z);
    &(&(&CMatrix::identity(4) + &zi) + &iz) - &zz
}

impl Hamiltonian {
    pub fn new(n: usize) -> Self {
        Self { n, terms: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    fn check_coupling(coupling: f64) -> Result<()> {
        if !coupling.is_finite() || coupling.abs() > 1.0 {
            return invalid(format!("coupling {coupling} violates |J| <= 1"));
        }
        Ok(())
    }

    pub fn add_two_site(&mut self, coupling: f64, i: usize, j: usize, op: CMatrix) -> Result<&mut Self> {
        Self::check_coupling(coupling)?;
        if i == j {
            return invalid("two-site term on a single site");
        }
        check_site_list(self.n, &[i, j])?;
        if op.rows() != 4 || op.cols() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: op.rows(),
            });
        }
        if !op.is_hermitian(1e-12) {
            return invalid("two-site term is not Hermitian");
        }
        self.terms.push(Term {
            coupling,
            sites: vec![i, j],
            op,
        });
        Ok(self)
    }

    pub fn add_single_site(&mut self, coupling: f64, i: usize, op: CMatrix) -> Result<&mut Self> {
        Self::check_coupling(coupling)?;
        check_site_list(self.n, &[i])?;
        if op.rows() != 2 || op.cols() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: op.rows(),
            });
        }
        if !op.is_hermitian(1e-12) {
            return invalid("single-site term is not Hermitian");
        }
        self.terms.push(Term {
            coupling,
            sites: vec![i],
            op,
        });
        Ok(self)
    }

    /// `Σ_k J_k V_k V_{k+1}` for a Pauli `V` on an open chain.
    pub fn pauli_chain(n: usize, letter: Pauli, couplings: &[f64]) -> Result<Self> {
        if n < 2 || couplings.len() != n - 1 {
            return invalid("a chain of n sites needs n - 1 couplings");
        }
        let op = letter.matrix().kron(&letter.matrix());
        let mut h = Self::new(n);
        for (k, &j) in couplings.iter().enumerate() {
            h.add_two_site(j, k, k + 1, op.clone())?;
        }
        Ok(h)
    }

    /// Uniform nearest-neighbour `Σ X_k X_{k+1}`.
    pub fn xx_chain(n: usize) -> Result<Self> {
        Self::pauli_chain(n, Pauli::X, &vec![1.0; n.saturating_sub(1)])
    }

    /// Sum of controlled-Z generators over `edges`.
    pub fn cz_generators(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut h = Self::new(n);
        for &(i, j) in edges {
            h.add_two_site(1.0, i, j, h_cz_matrix())?;
        }
        Ok(h)
    }

    /// Errors if any two-site term spans a distance above `max_range`.
    pub fn check_range(&self, geometry: &Geometry, max_range: f64) -> Result<()> {
        if geometry.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: geometry.len(),
            });
        }
        for term in &self.terms {
            if let [i, j] = term.sites[..] {
                let d = geometry.distance(i, j);
                if d > max_range + 1e-12 {
                    return invalid(format!(
                        "term on ({i}, {j}) spans {d}, beyond the interaction range {max_range}"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Whether every pair of terms commutes (checked on their joint support).
    pub fn is_commuting(&self) -> bool {
        for (a, ta) in self.terms.iter().enumerate() {
            for tb in &self.terms[a + 1..] {
                if ta.sites.iter().all(|s| !tb.sites.contains(s)) {
                    continue;
                }
                let mut joint = ta.sites.clone();
                for &s in &tb.sites {
                    if !joint.contains(&s) {
                        joint.push(s);
                    }
                }
                let ea = embed(&ta.op, &ta.sites, &joint);
                let eb = embed(&tb.op, &tb.sites, &joint);
                if ea.commutator(&eb).frobenius_norm() >= COMMUTATOR_TOLERANCE {
                    return false;
                }
            }
        }
        true
    }

    /// Full `2^n × 2^n` matrix.
    pub fn dense_matrix(&self) -> CMatrix {
        let dim = 1usize << self.n;
        let mut h = CMatrix::zeros(dim, dim);
        let mut column = vec![Complex64::new(0.0, 0.0); dim];
        for c in 0..dim {
            column.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
            column[c] = Complex64::new(1.0, 0.0);
            for term in &self.terms {
                let out = apply_local(self.n, &column, &term.sites, &term.op);
                for (r, v) in out.into_iter().enumerate() {
                    if v != Complex64::new(0.0, 0.0) {
                        h.set(r, c, h.get(r, c) + v * term.coupling);
                    }
                }
            }
        }
        h
    }

    /// `e^{-iHt}|ψ⟩`.
    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        Propagator::new(self, t)?.apply(state)
    }
}

/// Embeds `op` acting on `sites` into the space of `joint` (a superset).
fn embed(op: &CMatrix, sites: &[usize], joint: &[usize]) -> CMatrix {
    let k = joint.len();
    let dim = 1usize << k;
    let local_bit = |pos: usize| 1usize << (k - 1 - pos);
    let positions: Vec<usize> = sites
        .iter()
        .map(|s| joint.iter().position(|j| j == s).expect("site in joint support"))
        .collect();
    let sub = |idx: usize| -> usize {
        positions
            .iter()
            .fold(0, |acc, &p| (acc << 1) | usize::from(idx & local_bit(p) != 0))
    };
    let site_bits: usize = positions.iter().map(|&p| local_bit(p)).sum();
    let mut out = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            if r & !site_bits == c & !site_bits {
                out.set(r, c, op.get(sub(r), sub(c)));
            }
        }
    }
    out
}

/// Precomputed `e^{-iHt}` for a fixed `H` and `t`.
///
/// Mutually commuting term sets are exponentiated term by term (exact, no
/// Trotter error); anything else goes through the dense exponential, which is
/// limited to [`DENSE_EXPONENTIAL_LIMIT`] sites.
#[derive(Debug, Clone)]
pub enum Propagator {
    Identity { n: usize },
    Local { n: usize, gates: Vec<(Vec<usize>, CMatrix)> },
    Dense { n: usize, unitary: CMatrix },
}

impl Propagator {
    pub fn new(h: &Hamiltonian, t: f64) -> Result<Self> {
        if !t.is_finite() {
            return invalid(format!("evolution time {t} is not finite"));
        }
        if t == 0.0 || h.terms.is_empty() {
            return Ok(Propagator::Identity { n: h.n });
        }
        let minus_it = Complex64::new(0.0, -t);
        if h.is_commuting() {
            let gates = h
                .terms
                .iter()
                .map(|term| {
                    let gen = term.op.scale(minus_it * term.coupling);
                    (term.sites.clone(), gen.expm())
                })
                .collect();
            return Ok(Propagator::Local { n: h.n, gates });
        }
        Self::dense(h, t)
    }

    /// Forces the dense route even for commuting terms.
    pub fn dense(h: &Hamiltonian, t: f64) -> Result<Self> {
        if !t.is_finite() {
            return invalid(format!("evolution time {t} is not finite"));
        }
        if h.n > DENSE_EXPONENTIAL_LIMIT {
            return Err(Error::Resource(format!(
                "dense exponential limited to {DENSE_EXPONENTIAL_LIMIT} sites, got {}",
                h.n
            )));
        }
        let unitary = h.dense_matrix().scale(Complex64::new(0.0, -t)).expm();
        Ok(Propagator::Dense { n: h.n, unitary })
    }

    pub fn n(&self) -> usize {
        match self {
            Propagator::Identity { n } | Propagator::Local { n, .. } | Propagator::Dense { n, .. } => *n,
        }
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.n() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: state.n(),
            });
        }
        let n = state.n();
        let amps = match self {
            Propagator::Identity { .. } => state.amplitudes().to_vec(),
            Propagator::Local { gates, .. } => gates
                .iter()
                .fold(state.amplitudes().to_vec(), |amps, (sites, u)| apply_local(n, &amps, sites, u)),
            Propagator::Dense { unitary, .. } => unitary.mul_vec(state.amplitudes()),
        };
        Ok(StateVector::from_parts_unchecked(n, amps))
    }
}

/// `e^{-iHt}|ψ⟩`.
pub fn evolve(state: &StateVector, h: &Hamiltonian, t: f64) -> Result<StateVector> {
    if state.n() != h.n() {
        return Err(Error::DimensionMismatch {
            expected: h.n(),
            found: state.n(),
        });
    }
    h.evolve(state, t)
}
