//! Connected correlators `u_n(A_1, …, A_n)` of observables with disjoint
//! supports, computed three independent ways:
//!
//! * the partition sum `Σ_P g(|P|) Π_{p∈P} ⟨Π_{j∈p} A_j⟩` with
//!   `g(k) = (-1)^(k-1) (k-1)!`,
//! * the subtraction recursion `u_n = ⟨A_1…A_n⟩ − Σ'_P Π_{p∈P} u_{|p|}`
//!   (all partitions except the single-block one), memoised over subsets,
//! * a central finite-difference stencil on the generating function
//!   `ln⟨exp(Σ λ_i A_i)⟩`.
//!
//! All routes read the disconnected correlators of every subset of the
//! observables; the first two share that table, the third works from the
//! reduced density matrix on the joint support instead.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::partitions::{moebius_g_f64, partition_cursor, RgsCursor};
use crate::quantum::{check_disjoint, CMatrix, Observable, StateVector};

/// Default maximum number of observables in one request.
pub const DEFAULT_OBSERVABLE_LIMIT: usize = 12;

/// Maximum number of observables accepted by [`un_generating_fd`].
pub const FD_OBSERVABLE_LIMIT: usize = 6;

/// Default finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-2;

/// Largest tolerated imaginary residue (relative to the magnitude of the sum)
/// before the real part is taken.
pub const IMAGINARY_TOLERANCE: f64 = 1e-9;

const MAX_FD_JOINT_SITES: usize = 10;

/// A state together with `n >= 1` observables of pairwise disjoint support.
#[derive(Debug, Clone)]
pub struct CorrelatorRequest<'a> {
    state: &'a StateVector,
    observables: Vec<Observable>,
}

impl<'a> CorrelatorRequest<'a> {
    pub fn new(state: &'a StateVector, observables: Vec<Observable>) -> Result<Self> {
        Self::with_limit(state, observables, DEFAULT_OBSERVABLE_LIMIT)
    }

    pub fn with_limit(state: &'a StateVector, observables: Vec<Observable>, limit: usize) -> Result<Self> {
        if observables.is_empty() {
            return invalid("a correlator needs at least one observable");
        }
        if observables.len() > limit.min(63) {
            return Err(Error::Resource(format!(
                "{} observables exceeds the limit of {limit}",
                observables.len()
            )));
        }
        check_disjoint(&observables)?;
        for obs in &observables {
            if let Some(&bad) = obs.support().iter().find(|&&s| s >= state.n()) {
                return invalid(format!("site {bad} outside a {}-site state", state.n()));
            }
        }
        Ok(Self { state, observables })
    }

    pub fn state(&self) -> &StateVector {
        self.state
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    fn all_hermitian(&self) -> bool {
        self.observables.iter().all(Observable::is_hermitian)
    }

    fn require_hermitian(&self) -> Result<()> {
        if self.all_hermitian() {
            Ok(())
        } else {
            invalid("real-valued correlators need Hermitian observables")
        }
    }
}

/// Neumaier-compensated sum of complex terms.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: Complex64,
    carry: Complex64,
    magnitude: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: Complex64) {
        self.magnitude += x.norm();
        self.sum.re = neumaier_step(self.sum.re, x.re, &mut self.carry.re);
        self.sum.im = neumaier_step(self.sum.im, x.im, &mut self.carry.im);
    }

    pub(crate) fn value(&self) -> Complex64 {
        self.sum + self.carry
    }

    /// Σ|term|, the scale against which cancellation is judged.
    pub(crate) fn magnitude(&self) -> f64 {
        self.magnitude
    }
}

fn neumaier_step(sum: f64, x: f64, carry: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *carry += (sum - t) + x;
    } else {
        *carry += (x - t) + sum;
    }
    t
}

fn real_part(value: Complex64, scale: f64, what: &str) -> f64 {
    if value.im.abs() > IMAGINARY_TOLERANCE * scale.max(1.0) {
        log::warn!("{what}: imaginary residue {:.3e} dropped", value.im);
    }
    value.re
}

/// `⟨Π_{j∈S} A_j⟩` for every subset `S` of the observables, indexed by bitmask
/// (entry 0 is the empty product, 1).
pub fn disconnected_table(state: &StateVector, observables: &[Observable]) -> Result<Vec<Complex64>> {
    check_disjoint(observables)?;
    let k = observables.len();
    if k > 24 {
        return Err(Error::Resource(format!("{k} observables is too many to tabulate")));
    }
    let n = state.n();
    let mut table = vec![Complex64::new(0.0, 0.0); 1 << k];
    table[0] = Complex64::new(1.0, 0.0);
    // depth-first: each child applies one more observable to its parent's vector
    let mut stack: Vec<(u64, usize, Vec<Complex64>)> = vec![(0, 0, state.amplitudes().to_vec())];
    while let Some((mask, next, phi)) = stack.pop() {
        for j in next..k {
            let child = observables[j].apply(n, &phi);
            let child_mask = mask | (1 << j);
            table[child_mask as usize] = state
                .amplitudes()
                .iter()
                .zip(&child)
                .map(|(a, b)| a.conj() * b)
                .sum();
            if j + 1 < k {
                stack.push((child_mask, j + 1, child));
            }
        }
    }
    Ok(table)
}

/// Partition-sum connected correlator, complex-valued (no Hermiticity needed).
pub fn un_partition_sum_complex(req: &CorrelatorRequest) -> Result<Complex64> {
    let table = disconnected_table(req.state, &req.observables)?;
    Ok(partition_sum_over(&table, req.len(), full_mask(req.len()))?.value())
}

/// `u_n` by the partition sum, folded in restricted-growth-string order.
/// For `n = 1` this is `⟨A_1⟩`.
///
/// Products and the running sum are kept in double-double precision: the
/// Möbius weights reach `(n-1)!`, so ordinary rounding of the block products
/// alone would cost about nine digits at `n = 10`.
pub fn un_partition_sum(req: &CorrelatorRequest) -> Result<f64> {
    req.require_hermitian()?;
    let table = disconnected_table(req.state, &req.observables)?;
    let scale = table.iter().map(|e| e.norm()).fold(0.0, f64::max);
    if let Some(bad) = table.iter().find(|e| e.im.abs() > IMAGINARY_TOLERANCE * scale.max(1.0)) {
        log::warn!("partition sum: imaginary residue {:.3e} dropped", bad.im);
    }
    let real: Vec<f64> = table.iter().map(|e| e.re).collect();
    let n = req.len();
    let elems = members(full_mask(n));
    let mut cursor = partition_cursor(n, n)?;
    let mut blocks = Vec::with_capacity(n);
    let mut acc = DoubleDouble::ZERO;
    while cursor.advance() {
        let k = lift_masks(&cursor, &elems, &mut blocks);
        let mut term = DoubleDouble::from(moebius_g_f64(k));
        for &b in &blocks {
            term = term.mul_f64(real[b as usize]);
            if term.hi == 0.0 {
                break;
            }
        }
        acc = acc.add(term);
    }
    Ok(acc.hi + acc.lo)
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Self {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    fn quick_two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        Self { hi: s, lo: b - (s - a) }
    }

    fn add(self, other: Self) -> Self {
        let s = Self::two_sum(self.hi, other.hi);
        let t = Self::two_sum(self.lo, other.lo);
        let u = Self::quick_two_sum(s.hi, s.lo + t.hi);
        Self::quick_two_sum(u.hi, u.lo + t.lo)
    }

    fn mul_f64(self, x: f64) -> Self {
        let p = self.hi * x;
        let e = self.hi.mul_add(x, -p);
        Self::quick_two_sum(p, e + self.lo * x)
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }
}

fn full_mask(n: usize) -> u64 {
    (1u64 << n) - 1
}

fn members(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Maps the block masks of a cursor over `|S|` local elements back to
/// global masks over the elements of `S`.
fn lift_masks(cursor: &RgsCursor, elems: &[usize], out: &mut Vec<u64>) -> usize {
    let k = cursor.block_count();
    out.clear();
    out.resize(k, 0);
    for (local, &label) in cursor.labels().iter().enumerate() {
        out[label] |= 1 << elems[local];
    }
    k
}

/// Möbius-weighted partition sum over the elements of `subset`, reading the
/// disconnected correlators from `table`.
fn partition_sum_over(table: &[Complex64], n: usize, subset: u64) -> Result<CompensatedSum> {
    let elems = members(subset);
    let mut cursor = partition_cursor(elems.len(), n.max(1))?;
    let mut blocks = Vec::with_capacity(elems.len());
    let mut acc = CompensatedSum::default();
    while cursor.advance() {
        let k = lift_masks(&cursor, &elems, &mut blocks);
        let mut term = Complex64::new(moebius_g_f64(k), 0.0);
        for &b in &blocks {
            term *= table[b as usize];
            if term == Complex64::new(0.0, 0.0) {
                break;
            }
        }
        acc.add(term);
    }
    Ok(acc)
}

/// Connected correlators of every nonempty subset, by the subtraction
/// recursion; entry `S` holds `u_{|S|}(A_S)`.
pub fn connected_table_recursive(req: &CorrelatorRequest) -> Result<Vec<Complex64>> {
    let n = req.len();
    let table = disconnected_table(req.state, &req.observables)?;
    let mut connected = vec![Complex64::new(0.0, 0.0); 1 << n];
    let mut order: Vec<u64> = (1..1u64 << n).collect();
    order.sort_by_key(|m| m.count_ones());
    let mut blocks = Vec::with_capacity(n);
    for subset in order {
        let elems = members(subset);
        let mut cursor = partition_cursor(elems.len(), n)?;
        let mut acc = CompensatedSum::default();
        while cursor.advance() {
            let k = lift_masks(&cursor, &elems, &mut blocks);
            if k == 1 {
                continue;
            }
            let term = blocks
                .iter()
                .fold(Complex64::new(1.0, 0.0), |p, &b| p * connected[b as usize]);
            acc.add(term);
        }
        connected[subset as usize] = table[subset as usize] - acc.value();
    }
    Ok(connected)
}

/// `u_n` by the subtraction recursion.
pub fn un_recursive(req: &CorrelatorRequest) -> Result<f64> {
    req.require_hermitian()?;
    let connected = connected_table_recursive(req)?;
    let value = connected[full_mask(req.len()) as usize];
    Ok(real_part(value, value.norm(), "recursion"))
}

/// Connected correlators of every nonempty subset, each by its own
/// partition sum.
pub fn connected_table_partition(req: &CorrelatorRequest) -> Result<Vec<Complex64>> {
    let n = req.len();
    let table = disconnected_table(req.state, &req.observables)?;
    let mut connected = vec![Complex64::new(0.0, 0.0); 1 << n];
    for subset in 1..1u64 << n {
        connected[subset as usize] = partition_sum_over(&table, n, subset)?.value();
    }
    Ok(connected)
}

/// Rebuilds `⟨A_1 … A_n⟩ = Σ_P Π_{p∈P} u_{|p|}(A_p)` from connected
/// correlators of all orders (themselves from partition sums).
pub fn reconstruct_disconnected(req: &CorrelatorRequest) -> Result<f64> {
    req.require_hermitian()?;
    let n = req.len();
    let connected = connected_table_partition(req)?;
    let mut cursor = partition_cursor(n, n)?;
    let mut blocks = Vec::with_capacity(n);
    let mut acc = CompensatedSum::default();
    while cursor.advance() {
        cursor.fill_block_masks(&mut blocks);
        acc.add(
            blocks
                .iter()
                .fold(Complex64::new(1.0, 0.0), |p, &b| p * connected[b as usize]),
        );
    }
    Ok(real_part(acc.value(), acc.magnitude(), "reconstruction"))
}

/// Bipartite connected correlator `⟨AB⟩ − ⟨A⟩⟨B⟩`.
pub fn u2(state: &StateVector, a: &Observable, b: &Observable) -> Result<f64> {
    let req = CorrelatorRequest::new(state, vec![a.clone(), b.clone()])?;
    req.require_hermitian()?;
    let table = disconnected_table(state, req.observables())?;
    let value = table[3] - table[1] * table[2];
    Ok(real_part(value, table[3].norm() + (table[1] * table[2]).norm(), "u2"))
}

/// `ln⟨exp(Σ λ_i A_i)⟩` at one point, given the reduced density matrix on the
/// joint support and each observable embedded there.
fn log_generating(rho: &CMatrix, embedded: &[CMatrix], lambdas: &[f64]) -> Result<f64> {
    let dim = rho.rows();
    let mut generator = CMatrix::zeros(dim, dim);
    for (op, &l) in embedded.iter().zip(lambdas) {
        generator = &generator + &op.scale(Complex64::new(l, 0.0));
    }
    let weight = rho.matmul(&generator.expm()).trace();
    if weight.re <= 0.0 {
        return invalid("generating function argument is not positive");
    }
    Ok(weight.re.ln())
}

/// `u_n` from the mixed central finite difference of the generating function
/// `ln⟨exp(Σ λ_i A_i)⟩` at `λ = 0`.
///
/// Uses the tensor-product stencil `λ_i ∈ {−h, +h}` (`2^n` evaluations, each a
/// dense exponential over the joint support) with weight `Π ε_i / (2h)^n`;
/// the truncation error is `O(h²)`.
pub fn un_generating_fd(req: &CorrelatorRequest, step: f64) -> Result<f64> {
    if !(1e-4..=1e-1).contains(&step) {
        return invalid(format!("finite-difference step {step} outside [1e-4, 1e-1]"));
    }
    let n = req.len();
    if n > FD_OBSERVABLE_LIMIT {
        return Err(Error::Resource(format!(
            "finite-difference oracle takes at most {FD_OBSERVABLE_LIMIT} observables, got {n}"
        )));
    }
    req.require_hermitian()?;
    let joint: Vec<usize> = req
        .observables
        .iter()
        .flat_map(|o| o.support().iter().copied())
        .collect();
    if joint.len() > MAX_FD_JOINT_SITES {
        return Err(Error::Resource(format!(
            "joint support of {} sites is too large for the generating function",
            joint.len()
        )));
    }
    let rho = req.state.reduced_density_matrix(&joint)?;
    // observable i occupies a contiguous run of local bits in the joint order
    let mut embedded = Vec::with_capacity(n);
    let mut before = 0usize;
    for obs in &req.observables {
        let width = obs.support().len();
        let after = joint.len() - before - width;
        let m = CMatrix::identity(1 << before)
            .kron(&obs.matrix())
            .kron(&CMatrix::identity(1 << after));
        embedded.push(m);
        before += width;
    }
    let mut acc = CompensatedSum::default();
    let mut lambdas = vec![0.0; n];
    for corner in 0..1u64 << n {
        let mut sign = 1.0;
        for (i, l) in lambdas.iter_mut().enumerate() {
            if corner >> i & 1 == 1 {
                *l = step;
            } else {
                *l = -step;
                sign = -sign;
            }
        }
        acc.add(Complex64::new(sign * log_generating(&rho, &embedded, &lambdas)?, 0.0));
    }
    Ok(acc.value().re / (2.0 * step).powi(n as i32))
}
