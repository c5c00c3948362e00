//! Reference states: GHZ, product states, the three-qubit example state, and
//! graph (cluster) states, the latter both as dense vectors and through their
//! stabilizer group.
//!
//! Indices are 0-based everywhere; site `k` here is qubit `k + 1` in the usual
//! 1-based physics notation.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_4;
use std::path::Path;
use std::rc::Rc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quantum::{
    apply_cz, check_disjoint, evolve, Hamiltonian, Observable, Pauli, PauliString, Phase, StateVector,
};

/// `(|0…0⟩ + |1…1⟩)/√2`.
pub fn ghz(n: usize) -> Result<StateVector> {
    if n < 2 {
        return invalid(format!("GHZ state needs n >= 2, got {n}"));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1usize.checked_shl(n as u32).unwrap_or(0)];
    if amps.is_empty() {
        return Err(Error::Resource(format!("{n} sites is too many")));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    amps[0] = Complex64::new(h, 0.0);
    let last = amps.len() - 1;
    amps[last] = Complex64::new(h, 0.0);
    StateVector::from_amplitudes(amps)
}

/// `|+⟩^⊗n`.
pub fn plus_state(n: usize) -> Result<StateVector> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::product(&vec![[Complex64::new(h, 0.0), Complex64::new(h, 0.0)]; n])
}

/// The three-qubit state with squared amplitudes
/// `(5, 3, 2, 2, 6, 3, 2, 1)/24` on `|000⟩ … |111⟩`; its tripartite `Z`
/// correlator is `1/18` while the `1|23` cut has no bipartite `Z` correlation.
pub fn tripartite_example_state() -> StateVector {
    let weights = [5.0, 3.0, 2.0, 2.0, 6.0, 3.0, 2.0, 1.0];
    let amps = weights
        .iter()
        .map(|w: &f64| Complex64::new((w / 24.0).sqrt(), 0.0))
        .collect();
    StateVector::from_amplitudes(amps).expect("squared amplitudes sum to 24/24")
}

/// Graph with optional vertex coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<Vec<f64>>>,
}

impl GraphSpec {
    pub fn new(n: usize, edges: Vec<(usize, usize)>, positions: Option<Vec<Vec<f64>>>) -> Result<Self> {
        let g = Self { n, edges, positions };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for &(i, j) in &self.edges {
            if i == j {
                return invalid(format!("self-loop on vertex {i}"));
            }
            if i >= self.n || j >= self.n {
                return invalid(format!("edge ({i}, {j}) outside {} vertices", self.n));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return invalid(format!("duplicate edge ({i}, {j})"));
            }
        }
        if let Some(pos) = &self.positions {
            if pos.len() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    found: pos.len(),
                });
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: GraphSpec = serde_json::from_str(text)?;
        g.validate()?;
        Ok(g)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Unit-spaced path `0 – 1 – … – (n-1)`.
    pub fn path(n: usize) -> Self {
        Self {
            n,
            edges: (1..n).map(|i| (i - 1, i)).collect(),
            positions: Some(line_positions(n)),
        }
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
            positions: Some(line_positions(n)),
        }
    }

    /// The longer-range one-dimensional graph used for exponentially large
    /// correlators: sites on a unit-spaced line, a complete graph on each
    /// window `{3k, 3k+1, 3k+2, 3k+3}`, consecutive windows sharing one site.
    /// Defined for `n ≡ 1 (mod 3)`, `n >= 4`; the longest edge spans 3 sites.
    pub fn chained_windows(n: usize) -> Result<Self> {
        if n < 4 || n % 3 != 1 {
            return invalid(format!("chained-window graph needs n ≡ 1 (mod 3) and n >= 4, got {n}"));
        }
        let mut edges = Vec::new();
        for start in (0..n - 1).step_by(3) {
            for i in start..start + 4 {
                for j in i + 1..start + 4 {
                    edges.push((i, j));
                }
            }
        }
        Self::new(n, edges, Some(line_positions(n)))
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(i, j)| {
                if i == v {
                    Some(j)
                } else if j == v {
                    Some(i)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Geometric length of an edge (index difference without positions).
    pub fn edge_length(&self, (i, j): (usize, usize)) -> f64 {
        match &self.positions {
            Some(pos) => pos[i]
                .iter()
                .zip(&pos[j])
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt(),
            None => (i as f64 - j as f64).abs(),
        }
    }

    /// Preparation time of the commuting controlled-Z schedule: every edge
    /// takes `π/4` per unit of length, all edges run simultaneously.
    pub fn preparation_time(&self) -> f64 {
        let longest = self
            .edges
            .iter()
            .map(|&e| self.edge_length(e))
            .fold(0.0, f64::max);
        FRAC_PI_4 * longest.ceil().max(if self.edges.is_empty() { 0.0 } else { 1.0 })
    }
}

fn line_positions(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| vec![i as f64]).collect()
}

/// `|+⟩^⊗n` followed by a controlled-Z on every edge.
pub fn cluster_state(g: &GraphSpec) -> Result<StateVector> {
    g.validate()?;
    let mut state = plus_state(g.n)?;
    for &(i, j) in &g.edges {
        state = apply_cz(&state, i, j)?;
    }
    Ok(state)
}

/// The same graph state prepared by evolving `|+⟩^⊗n` for `π/4` under the sum
/// of commuting controlled-Z generators (equal to [`cluster_state`] up to a
/// global phase).
pub fn cluster_state_by_evolution(g: &GraphSpec) -> Result<StateVector> {
    g.validate()?;
    let h = Hamiltonian::cz_generators(g.n, &g.edges)?;
    evolve(&plus_state(g.n)?, &h, FRAC_PI_4)
}

/// Packed bit vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64).max(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        if v {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn xor_assign(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Parity of the bitwise AND.
    pub fn dot(&self, other: &Bits) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    pub fn any(&self) -> bool {
        self.words.iter().any(|&w| w != 0)
    }

    /// Number of set bits `i` with `self[i] & other[i]`.
    fn and_count(&self, other: &Bits) -> u32 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }
}

/// Pauli operator `i^phase · Π_j X_j^{x_j} Z_j^{z_j}` in binary symplectic form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymplecticPauli {
    pub x: Bits,
    pub z: Bits,
    pub phase: Phase,
}

impl SymplecticPauli {
    pub fn identity(n: usize) -> Self {
        Self {
            x: Bits::zeros(n),
            z: Bits::zeros(n),
            phase: Phase::ONE,
        }
    }

    /// Converts a Pauli string on sites `< n` (`Y = i X Z`).
    pub fn from_pauli_string(n: usize, p: &PauliString) -> Result<Self> {
        let mut out = Self::identity(n);
        let mut ys = 0i64;
        for (&s, &l) in p.support().iter().zip(p.letters()) {
            if s >= n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: s + 1,
                });
            }
            let (x, z) = l.symplectic();
            out.x.set(s, x);
            out.z.set(s, z);
            if l == Pauli::Y {
                ys += 1;
            }
        }
        out.phase = p.phase() * Phase::from_exponent(ys);
        Ok(out)
    }

    /// `self · other`, using `Z^a X^b = (-1)^{ab} X^b Z^a`.
    pub fn mul(&self, other: &Self) -> Self {
        let swaps = self.z.and_count(&other.x) as i64;
        let mut x = self.x.clone();
        x.xor_assign(&other.x);
        let mut z = self.z.clone();
        z.xor_assign(&other.z);
        Self {
            x,
            z,
            phase: self.phase * other.phase * Phase::from_exponent(2 * swaps),
        }
    }

    /// Symplectic inner product: `true` when the two anticommute.
    pub fn anticommutes(&self, other: &Self) -> bool {
        self.x.dot(&other.z) ^ self.z.dot(&other.x)
    }

    fn same_operator(&self, other: &Self) -> bool {
        self.x == other.x && self.z == other.z
    }
}

/// Abelian Pauli group given by independent, pairwise commuting generators.
#[derive(Debug, Clone)]
pub struct StabilizerGroup {
    n: usize,
    generators: Vec<SymplecticPauli>,
    // Row-reduced copy of the generators with the combination producing each row.
    echelon: Vec<(SymplecticPauli, Bits, usize)>,
}

impl StabilizerGroup {
    pub fn new(n: usize, generators: Vec<SymplecticPauli>) -> Result<Self> {
        for g in &generators {
            if g.x.len() != n || g.z.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: g.x.len(),
                });
            }
            if !g.phase.is_real() {
                return invalid("stabilizer generators must be Hermitian");
            }
        }
        for (a, ga) in generators.iter().enumerate() {
            for gb in &generators[a + 1..] {
                if ga.anticommutes(gb) {
                    return invalid("stabilizer generators do not commute");
                }
            }
        }
        let echelon = Self::reduce(n, &generators)?;
        Ok(Self {
            n,
            generators,
            echelon,
        })
    }

    fn reduce(n: usize, generators: &[SymplecticPauli]) -> Result<Vec<(SymplecticPauli, Bits, usize)>> {
        let m = generators.len();
        let mut rows: Vec<(SymplecticPauli, Bits)> = generators
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let mut combo = Bits::zeros(m);
                combo.set(i, true);
                (g.clone(), combo)
            })
            .collect();
        let mut echelon = Vec::with_capacity(m);
        let mut used = vec![false; m];
        for col in 0..2 * n {
            let bit = |p: &SymplecticPauli| if col < n { p.x.get(col) } else { p.z.get(col - n) };
            let Some(pivot) = (0..m).find(|&r| !used[r] && bit(&rows[r].0)) else {
                continue;
            };
            used[pivot] = true;
            let (prow, pcombo) = rows[pivot].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != pivot && bit(&row.0) {
                    row.0.x.xor_assign(&prow.x);
                    row.0.z.xor_assign(&prow.z);
                    row.1.xor_assign(&pcombo);
                }
            }
            echelon.push((rows[pivot].0.clone(), rows[pivot].1.clone(), col));
        }
        if echelon.len() != m {
            return invalid("stabilizer generators are not independent");
        }
        Ok(echelon)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[SymplecticPauli] {
        &self.generators
    }

    /// Which generators multiply to `target` up to phase, if any.
    pub fn decompose(&self, target: &SymplecticPauli) -> Option<Bits> {
        let mut rest = target.clone();
        let mut combo = Bits::zeros(self.generators.len());
        for (row, row_combo, col) in &self.echelon {
            let bit = if *col < self.n {
                rest.x.get(*col)
            } else {
                rest.z.get(*col - self.n)
            };
            if bit {
                rest.x.xor_assign(&row.x);
                rest.z.xor_assign(&row.z);
                combo.xor_assign(row_combo);
            }
        }
        if rest.x.any() || rest.z.any() {
            None
        } else {
            Some(combo)
        }
    }

    /// Group element `Π_{i∈combo} g_i` with its phase.
    pub fn element(&self, combo: &Bits) -> SymplecticPauli {
        self.generators
            .iter()
            .enumerate()
            .filter(|(i, _)| combo.get(*i))
            .fold(SymplecticPauli::identity(self.n), |acc, (_, g)| acc.mul(g))
    }

    /// Expectation of `target` in the stabilized state: the phase relating it
    /// to a group element, or 0 outside the group. Complex phases (`±i`) are
    /// returned as-is, so the result is `i^k` or 0.
    fn expectation_symplectic(&self, target: &SymplecticPauli) -> Option<Phase> {
        let combo = self.decompose(target)?;
        let element = self.element(&combo);
        debug_assert!(element.same_operator(target));
        // target = i^{k_t - k_g} · element and ⟨element⟩ = 1
        Some(Phase::from_exponent(
            target.phase.exponent() as i64 - element.phase.exponent() as i64,
        ))
    }
}

/// Generator `i` is `X_i Π_{j∈N(i)} Z_j` with sign `+1`.
pub fn graph_stabilizer_group(g: &GraphSpec) -> Result<StabilizerGroup> {
    g.validate()?;
    let mut generators = Vec::with_capacity(g.n);
    for v in 0..g.n {
        let mut p = SymplecticPauli::identity(g.n);
        p.x.set(v, true);
        for w in g.neighbors(v) {
            p.z.set(w, true);
        }
        generators.push(p);
    }
    StabilizerGroup::new(g.n, generators)
}

/// `⟨p⟩ ∈ {−1, 0, +1}` in the stabilizer state; `p` must be Hermitian.
pub fn stabilizer_pauli_expectation(s: &StabilizerGroup, p: &PauliString) -> Result<i8> {
    if !p.is_hermitian() {
        return invalid("only Hermitian Pauli strings (phase ±1) can be queried");
    }
    let target = SymplecticPauli::from_pauli_string(s.n, p)?;
    Ok(match s.expectation_symplectic(&target) {
        None => 0,
        Some(Phase::ONE) => 1,
        Some(Phase::MINUS_ONE) => -1,
        Some(_) => unreachable!("product of commuting Hermitian Paulis is Hermitian"),
    })
}

/// Single-site pattern `T_j` for the chained-window graph: `X` at interior sites whose
/// 1-based index is `≡ 1 (mod 3)`, `Y` everywhere else (including both ends).
pub fn window_observables(n: usize) -> Result<Vec<PauliString>> {
    if n < 4 || n % 3 != 1 {
        return invalid(format!("window pattern needs n ≡ 1 (mod 3) and n >= 4, got {n}"));
    }
    Ok((0..n)
        .map(|site| {
            let one_based = site + 1;
            let interior = one_based > 1 && one_based < n;
            let letter = if interior && one_based % 3 == 1 { Pauli::X } else { Pauli::Y };
            PauliString::single(site, letter)
        })
        .collect())
}

/// `Y, X, …, X, Y` on a path of `n >= 2` sites.
pub fn path_end_y_observables(n: usize) -> Result<Vec<PauliString>> {
    if n < 2 {
        return invalid("the Y…X…Y pattern needs at least two sites");
    }
    Ok((0..n)
        .map(|site| {
            let letter = if site == 0 || site == n - 1 { Pauli::Y } else { Pauli::X };
            PauliString::single(site, letter)
        })
        .collect())
}

/// Largest number of observables accepted by [`stabilizer_connected_correlator`].
pub const STABILIZER_OBSERVABLE_LIMIT: usize = 128;

/// Largest dimension of the space of subsets with nonzero expectation.
const MAX_KERNEL_DIM: usize = 22;

/// Exact `u_n` of Pauli observables in a stabilizer state.
///
/// Only subsets whose product lies in the group (up to sign) have nonzero
/// disconnected correlators. Those subsets form the kernel of the
/// generator/observable commutation matrix over GF(2), so the partition sum
/// only ranges over partitions whose blocks all lie in that kernel. The sum is
/// evaluated by memoised recursion on the block holding the lowest remaining
/// index, counting partitions by block number to apply the Möbius weight.
pub fn stabilizer_connected_correlator(s: &StabilizerGroup, observables: &[PauliString]) -> Result<BigInt> {
    let m = observables.len();
    if m == 0 {
        return invalid("a correlator needs at least one observable");
    }
    if m > STABILIZER_OBSERVABLE_LIMIT {
        return Err(Error::Resource(format!(
            "{m} observables exceeds {STABILIZER_OBSERVABLE_LIMIT}"
        )));
    }
    let as_obs: Vec<Observable> = observables.iter().cloned().map(Observable::Pauli).collect();
    if observables.iter().any(|p| p.support().iter().any(|&site| site >= s.n)) {
        return invalid("observable outside the stabilized system");
    }
    check_disjoint(&as_obs)?;
    if observables.iter().any(|p| !p.is_hermitian()) {
        return invalid("only Hermitian Pauli strings (phase ±1) can be correlated");
    }
    let ops: Vec<SymplecticPauli> = observables
        .iter()
        .map(|p| SymplecticPauli::from_pauli_string(s.n, p))
        .collect::<Result<_>>()?;

    // rows: one per generator, bit j set when generator anticommutes with observable j
    let mut rows: Vec<u128> = s
        .generators()
        .iter()
        .map(|g| {
            ops.iter()
                .enumerate()
                .filter(|(_, o)| g.anticommutes(o))
                .fold(0u128, |acc, (j, _)| acc | (1 << j))
        })
        .collect();
    let basis = gf2_kernel(&mut rows, m);
    if basis.len() > MAX_KERNEL_DIM {
        return Err(Error::Resource(format!(
            "{} independent nonzero correlators is too many to enumerate",
            basis.len()
        )));
    }

    let mut family: Vec<(u128, i8)> = Vec::new();
    for combo in 1u64..1 << basis.len() {
        let subset = basis
            .iter()
            .enumerate()
            .filter(|(i, _)| combo >> i & 1 == 1)
            .fold(0u128, |acc, (_, &b)| acc ^ b);
        let product = (0..m)
            .filter(|&j| subset >> j & 1 == 1)
            .fold(SymplecticPauli::identity(s.n), |acc, j| acc.mul(&ops[j]));
        match s.expectation_symplectic(&product) {
            Some(Phase::ONE) => family.push((subset, 1)),
            Some(Phase::MINUS_ONE) => family.push((subset, -1)),
            Some(_) => return invalid("observable product is not Hermitian"),
            None => {}
        }
    }

    let full: u128 = if m == 128 { u128::MAX } else { (1u128 << m) - 1 };
    let mut memo: HashMap<u128, Rc<Vec<BigInt>>> = HashMap::new();
    let counts = count_partitions(full, &family, &mut memo);
    let mut total = BigInt::zero();
    for (k, c) in counts.iter().enumerate() {
        if k == 0 || c.is_zero() {
            continue;
        }
        total += moebius_big(k) * c;
    }
    Ok(total)
}

fn moebius_big(k: usize) -> BigInt {
    let factorial = (1..k).fold(BigInt::one(), |acc, x| acc * x);
    if k % 2 == 1 {
        factorial
    } else {
        -factorial
    }
}

/// Signed count of partitions of `mask` into family blocks, by block number.
fn count_partitions(
    mask: u128,
    family: &[(u128, i8)],
    memo: &mut HashMap<u128, Rc<Vec<BigInt>>>,
) -> Rc<Vec<BigInt>> {
    if mask == 0 {
        return Rc::new(vec![BigInt::one()]);
    }
    if let Some(hit) = memo.get(&mask) {
        return hit.clone();
    }
    let low = mask & mask.wrapping_neg();
    let mut out: Vec<BigInt> = Vec::new();
    for &(block, sign) in family {
        if block & low == 0 || block & !mask != 0 {
            continue;
        }
        let rest = count_partitions(mask & !block, family, memo);
        if out.len() < rest.len() + 1 {
            out.resize(rest.len() + 1, BigInt::zero());
        }
        for (k, c) in rest.iter().enumerate() {
            if sign > 0 {
                out[k + 1] += c;
            } else {
                out[k + 1] -= c;
            }
        }
    }
    let out = Rc::new(out);
    memo.insert(mask, out.clone());
    out
}

/// Basis of `{v : rows · v = 0}` over GF(2) for `m` columns.
fn gf2_kernel(rows: &mut [u128], m: usize) -> Vec<u128> {
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, column)
    let mut next_row = 0;
    for col in 0..m {
        let Some(r) = (next_row..rows.len()).find(|&r| rows[r] >> col & 1 == 1) else {
            continue;
        };
        rows.swap(next_row, r);
        let pivot = rows[next_row];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != next_row && *row >> col & 1 == 1 {
                *row ^= pivot;
            }
        }
        pivots.push((next_row, col));
        next_row += 1;
    }
    let pivot_cols: u128 = pivots.iter().fold(0, |acc, &(_, c)| acc | (1 << c));
    (0..m)
        .filter(|&f| pivot_cols >> f & 1 == 0)
        .map(|free| {
            let mut v = 1u128 << free;
            for &(r, c) in &pivots {
                if rows[r] >> free & 1 == 1 {
                    v |= 1 << c;
                }
            }
            v
        })
        .collect()
}
