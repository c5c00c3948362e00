use num_complex::Complex64;

use super::matrix::CMatrix;
use super::dense_ceiling;
use crate::error::{invalid, Error, Result};

/// Tolerance on `Σ|a|² = 1` enforced by constructors.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Dense `n`-qubit pure state.
///
/// Site 0 is the most significant bit of the basis index, so the amplitude of
/// `|b0 b1 … b(n-1)⟩` lives at index `b0·2^(n-1) + … + b(n-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

/// Bit mask of `site` in an `n`-qubit basis index.
#[inline]
pub fn site_mask(n: usize, site: usize) -> usize {
    1 << (n - 1 - site)
}

fn check_sites(n: usize) -> Result<()> {
    if n == 0 {
        return invalid("a state needs at least one site");
    }
    let ceiling = dense_ceiling();
    if n > ceiling {
        return Err(Error::Resource(format!(
            "{n} sites exceeds the dense ceiling of {ceiling}"
        )));
    }
    Ok(())
}

impl StateVector {
    /// Wraps amplitudes that must already be normalised.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = dim_to_sites(amps.len())?;
        check_sites(n)?;
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return invalid(format!("amplitudes have squared norm {norm_sqr}, expected 1"));
        }
        Ok(Self { n, amps })
    }

    /// Normalises arbitrary nonzero amplitudes.
    pub fn from_unnormalized(amps: Vec<Complex64>) -> Result<Self> {
        let n = dim_to_sites(amps.len())?;
        check_sites(n)?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return invalid("cannot normalise a zero or non-finite vector");
        }
        Ok(Self {
            n,
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_sites(n)?;
        if index >= 1 << n {
            return invalid(format!("basis index {index} out of range for {n} sites"));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// `|0…0⟩`.
    pub fn zeros(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    /// Tensor product of single-qubit states `(α_k, β_k)`, site 0 first.
    pub fn product(sites: &[[Complex64; 2]]) -> Result<Self> {
        let n = sites.len();
        check_sites(n)?;
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        for local in sites {
            let norm = (local[0].norm_sqr() + local[1].norm_sqr()).sqrt();
            if norm == 0.0 {
                return invalid("zero single-site vector in product state");
            }
            amps = amps
                .iter()
                .flat_map(|&a| [a * local[0] / norm, a * local[1] / norm])
                .collect();
        }
        Ok(Self { n, amps })
    }

    pub(crate) fn from_parts_unchecked(n: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n);
        Self { n, amps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, bits: &[u8]) -> Complex64 {
        assert_eq!(bits.len(), self.n);
        let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b as usize & 1));
        self.amps[idx]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Reduced density matrix on `sites`; `sites[0]` is the most significant
    /// local bit.
    pub fn reduced_density_matrix(&self, sites: &[usize]) -> Result<CMatrix> {
        check_site_list(self.n, sites)?;
        let k = sites.len();
        let dim = 1 << k;
        let offsets = local_offsets(self.n, sites);
        let site_bits: usize = offsets[dim - 1];
        let mut rho = CMatrix::zeros(dim, dim);
        let mut block = vec![Complex64::new(0.0, 0.0); dim];
        for base in 0..self.amps.len() {
            if base & site_bits != 0 {
                continue;
            }
            for (l, slot) in block.iter_mut().enumerate() {
                *slot = self.amps[base | offsets[l]];
            }
            for r in 0..dim {
                if block[r] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..dim {
                    let v = rho.get(r, c) + block[r] * block[c].conj();
                    rho.set(r, c, v);
                }
            }
        }
        Ok(rho)
    }
}

fn dim_to_sites(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return invalid(format!("state dimension {dim} is not a power of two >= 2"));
    }
    Ok(dim.trailing_zeros() as usize)
}

pub(crate) fn check_site_list(n: usize, sites: &[usize]) -> Result<()> {
    let mut seen = 0u64;
    for &s in sites {
        if s >= n {
            return invalid(format!("site {s} outside a {n}-site system"));
        }
        if seen >> s & 1 == 1 {
            return invalid(format!("site {s} listed twice"));
        }
        seen |= 1 << s;
    }
    Ok(())
}

/// Global-index offset of each local basis index over `sites` (first site is
/// the most significant local bit).
pub(crate) fn local_offsets(n: usize, sites: &[usize]) -> Vec<usize> {
    let k = sites.len();
    (0..1usize << k)
        .map(|l| {
            sites
                .iter()
                .enumerate()
                .filter(|(pos, _)| l >> (k - 1 - pos) & 1 == 1)
                .fold(0, |acc, (_, &s)| acc | site_mask(n, s))
        })
        .collect()
}

/// Applies a `2^k × 2^k` matrix acting on `sites` to a full amplitude vector.
pub(crate) fn apply_local(n: usize, amps: &[Complex64], sites: &[usize], m: &CMatrix) -> Vec<Complex64> {
    let dim = 1 << sites.len();
    debug_assert_eq!(m.rows(), dim);
    let offsets = local_offsets(n, sites);
    let site_bits = offsets[dim - 1];
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    let mut block = vec![Complex64::new(0.0, 0.0); dim];
    for base in 0..amps.len() {
        if base & site_bits != 0 {
            continue;
        }
        for (l, slot) in block.iter_mut().enumerate() {
            *slot = amps[base | offsets[l]];
        }
        for (r, &off) in offsets.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, &b) in block.iter().enumerate() {
                acc += m.get(r, c) * b;
            }
            out[base | off] = acc;
        }
    }
    out
}

/// Distance between two states modulo a global phase:
/// `min_φ ‖a − e^{iφ} b‖ = sqrt(2 − 2|⟨a|b⟩|)`.
///
/// Evaluated as the norm of the phase-aligned difference, which stays accurate
/// for nearly equal states where the closed form loses half its digits.
pub fn global_phase_distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    let overlap = b.inner(a)?;
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    Ok(a.amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| (x - phase * y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Controlled-Z between sites `i` and `j`.
pub fn apply_cz(state: &StateVector, i: usize, j: usize) -> Result<StateVector> {
    if i == j {
        return invalid("controlled-Z needs two distinct sites");
    }
    check_site_list(state.n, &[i, j])?;
    let both = site_mask(state.n, i) | site_mask(state.n, j);
    let amps = state
        .amps
        .iter()
        .enumerate()
        .map(|(idx, &a)| if idx & both == both { -a } else { a })
        .collect();
    Ok(StateVector::from_parts_unchecked(state.n, amps))
}
