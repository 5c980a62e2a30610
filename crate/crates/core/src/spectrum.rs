//! Fourier (Walsh) spectrum of a binary decision tree.
//!
//! For a tree over `d` binary attributes with classification function
//! `f: {0,1}^d -> {0,1}`, the coefficient for index `j` is
//! `ω_j = 2^-d Σ_x f(x) ψ_j(x)` with `ψ_j(x) = (-1)^(j·x)`, and
//! `f(x) = Σ_j ω_j ψ_j(x)`.
//!
//! Each leaf path `h` with defined attribute set `D` covers `2^(d-|D|)` inputs,
//! so its share of `ω_j` is `2^-|D| f(h) ψ_j(h)` when every 1-bit of `j` lies in
//! `D`, and zero otherwise (the wildcard attributes cancel). Coefficients are
//! therefore enumerated from path subsets, never from `2^d` inputs.
//!
//! Thresholding computes order after order and stops at the first order `i`
//! whose lower-bound cumulative energy fraction
//! `CEF_i = CE_i / (CE_i + (d - i + 1) E_i)` reaches the requested threshold,
//! where `E_i` is the energy at order `i` and `CE_i` the energy up to `i`.
//! The bound assumes per-order energy decays with order.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::hoeffding_tree::{HoeffdingTree, TreePath};
use crate::scalar::Scalar;

/// Cost model: bytes per stored coefficient value.
pub const COEFFICIENT_VALUE_BYTES: usize = 8;
/// Cost model: bytes per attribute id in a coefficient index.
pub const INDEX_ATTRIBUTE_BYTES: usize = 4;
/// Cost model: fixed bytes per spectrum (dimension, cutoff, energy fraction).
pub const SPECTRUM_HEADER_BYTES: usize = 24;

/// Index `j` of a coefficient, stored as the sorted attribute ids of its
/// 1-bits. The order is the number of 1-bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CoefficientIndex(Vec<u32>);

impl CoefficientIndex {
    pub fn new(mut attributes: Vec<u32>) -> Self {
        attributes.sort_unstable();
        attributes.dedup();
        CoefficientIndex(attributes)
    }

    pub fn zero() -> Self {
        CoefficientIndex(Vec::new())
    }

    pub fn from_bits(j: &BitVector) -> Self {
        CoefficientIndex(j.ones().map(|a| a as u32).collect())
    }

    pub fn to_bits(&self, dim: usize) -> BitVector {
        let mut v = BitVector::zeros(dim);
        for &a in &self.0 {
            v.set(a as usize, true);
        }
        v
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn attributes(&self) -> &[u32] {
        &self.0
    }

    /// `j·x mod 2`.
    #[inline]
    pub fn parity(&self, x: &BitVector) -> bool {
        self.0.iter().fold(false, |acc, &a| acc ^ x.get(a as usize))
    }

    /// `ψ_j(x)` as ±1.
    #[inline]
    pub fn sign(&self, x: &BitVector) -> i8 {
        if self.parity(x) {
            -1
        } else {
            1
        }
    }
}

impl fmt::Display for CoefficientIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// `ψ_j(x) = (-1)^(j·x)` for bit-vector `j` and `x` of equal length.
pub fn basis(j: &BitVector, x: &BitVector) -> Result<i8> {
    if j.len() != x.len() {
        return Err(Error::Schema(format!(
            "basis index has {} bits, input has {}",
            j.len(),
            x.len()
        )));
    }
    let parity = j.ones().fold(false, |acc, a| acc ^ x.get(a));
    Ok(if parity { -1 } else { 1 })
}

/// Share of `ω_j` contributed by one path: `2^-|D| f(h) ψ_j(h)` if the 1-bits
/// of `j` all lie in the path's defined set `D`, else zero.
pub fn path_coefficient_contribution<S: Scalar>(path: &TreePath, j: &CoefficientIndex) -> S {
    if path.class == 0 {
        return S::zero();
    }
    let mut negative = false;
    for &a in j.attributes() {
        match path
            .conditions
            .iter()
            .find(|&&(attr, _)| attr == a as usize)
        {
            Some(&(_, bit)) => negative ^= bit,
            None => return S::zero(),
        }
    }
    let w = S::dyadic(path.conditions.len() as u32);
    if negative {
        -w
    } else {
        w
    }
}

/// Sparse spectrum, possibly truncated at `order_cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSpectrum<S> {
    dim: usize,
    coefficients: BTreeMap<CoefficientIndex, S>,
    order_cutoff: usize,
    captured_energy_fraction: S,
    energy_bound: S,
}

impl<S: Scalar> FourierSpectrum<S> {
    /// Spectrum from explicit coefficients; zeros are dropped.
    pub fn from_coefficients(
        dim: usize,
        coefficients: impl IntoIterator<Item = (CoefficientIndex, S)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut cutoff = 0;
        for (j, w) in coefficients {
            if let Some(&a) = j.attributes().last() {
                if a as usize >= dim {
                    return Err(Error::Schema(format!(
                        "coefficient index {j} outside dimension {dim}"
                    )));
                }
            }
            cutoff = cutoff.max(j.order());
            if !w.is_zero() {
                map.insert(j, w);
            }
        }
        Ok(FourierSpectrum {
            dim,
            coefficients: map,
            order_cutoff: cutoff,
            captured_energy_fraction: S::one(),
            energy_bound: S::one(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order_cutoff(&self) -> usize {
        self.order_cutoff
    }

    /// Stored energy over the tree's exact total energy.
    pub fn captured_energy_fraction(&self) -> &S {
        &self.captured_energy_fraction
    }

    /// `CEF_i` at the stopping order (1 when every order was computed).
    pub fn energy_bound(&self) -> &S {
        &self.energy_bound
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Stored coefficient, zero when absent.
    pub fn coefficient(&self, j: &CoefficientIndex) -> S {
        self.coefficients.get(j).cloned().unwrap_or_else(S::zero)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&CoefficientIndex, &S)> {
        self.coefficients.iter()
    }

    /// `f(x) = Σ_j ω_j ψ_j(x)` over stored coefficients.
    pub fn evaluate(&self, x: &BitVector) -> S {
        self.coefficients.iter().fold(S::zero(), |acc, (j, w)| {
            if j.parity(x) {
                acc - w.clone()
            } else {
                acc + w.clone()
            }
        })
    }

    /// Class 1 iff `f(x) >= 1/2`.
    pub fn classify(&self, x: &BitVector) -> u8 {
        let half = S::one() / (S::one() + S::one());
        u8::from(self.evaluate(x) >= half)
    }

    pub fn total_energy(&self) -> S {
        self.coefficients
            .values()
            .fold(S::zero(), |acc, w| acc + w.clone() * w.clone())
    }

    pub fn order_energy(&self, order: usize) -> S {
        self.coefficients
            .iter()
            .filter(|(j, _)| j.order() == order)
            .fold(S::zero(), |acc, (_, w)| acc + w.clone() * w.clone())
    }

    /// Energy per order `0..=order_cutoff`; diagnostics for decay.
    pub fn order_energies(&self) -> Vec<S> {
        let mut out = vec![S::zero(); self.order_cutoff + 1];
        for (j, w) in &self.coefficients {
            out[j.order()] = out[j.order()].clone() + w.clone() * w.clone();
        }
        out
    }

    /// Bytes under the documented cost model.
    pub fn memory_bytes(&self) -> usize {
        SPECTRUM_HEADER_BYTES
            + self
                .coefficients
                .keys()
                .map(|j| COEFFICIENT_VALUE_BYTES + INDEX_ATTRIBUTE_BYTES * j.order())
                .sum::<usize>()
    }

    /// Same schema and every coefficient within `tol` (missing = 0).
    pub fn approx_eq(&self, other: &Self, tol: &S) -> Result<bool> {
        if self.dim != other.dim {
            return Err(Error::Schema(format!(
                "spectra over {} and {} attributes",
                self.dim, other.dim
            )));
        }
        let within =
            |j: &CoefficientIndex| (self.coefficient(j) - other.coefficient(j)).abs() <= *tol;
        Ok(self.coefficients.keys().all(within) && other.coefficients.keys().all(within))
    }

    /// Text form: a header then one `attributes value` line per coefficient,
    /// values with 17 significant digits.
    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "fct-spectrum 1")?;
        writeln!(w, "d {}", self.dim)?;
        writeln!(w, "order_cutoff {}", self.order_cutoff)?;
        writeln!(
            w,
            "captured_energy_fraction {:.16e}",
            self.captured_energy_fraction.to_f64_lossy()
        )?;
        writeln!(w, "energy_bound {:.16e}", self.energy_bound.to_f64_lossy())?;
        writeln!(w, "coefficients {}", self.coefficients.len())?;
        for (j, v) in &self.coefficients {
            writeln!(w, "{j} {:.16e}", v.to_f64_lossy())?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("write to vec");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = |what: &str| -> Result<String> {
            match lines.next() {
                Some(Ok(l)) => Ok(l),
                Some(Err(e)) => Err(Error::Parse(format!("reading {what}: {e}"))),
                None => Err(Error::Parse(format!("missing {what}"))),
            }
        };
        let magic = next("header")?;
        if magic.trim() != "fct-spectrum 1" {
            return Err(Error::Parse(format!("unknown spectrum header `{magic}`")));
        }
        let field = |line: String, key: &str| -> Result<String> {
            line.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| Error::Parse(format!("expected `{key}`, found `{line}`")))
        };
        let parse_usize = |s: String| -> Result<usize> {
            s.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad integer `{s}`")))
        };
        let parse_scalar = |s: &str| -> Result<S> {
            let v: f64 = s
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad number `{s}`")))?;
            S::from_f64(v).ok_or_else(|| Error::Parse(format!("unrepresentable value `{s}`")))
        };
        let dim = parse_usize(field(next("d")?, "d")?)?;
        let order_cutoff = parse_usize(field(next("order_cutoff")?, "order_cutoff")?)?;
        let captured = parse_scalar(&field(
            next("energy fraction")?,
            "captured_energy_fraction",
        )?)?;
        let bound = parse_scalar(&field(next("energy bound")?, "energy_bound")?)?;
        let count = parse_usize(field(next("coefficient count")?, "coefficients")?)?;
        let mut coefficients = BTreeMap::new();
        for _ in 0..count {
            let line = next("coefficient")?;
            let (attrs, value) = line
                .split_once(' ')
                .ok_or_else(|| Error::Parse(format!("bad coefficient line `{line}`")))?;
            let j = if attrs == "-" {
                CoefficientIndex::zero()
            } else {
                let ids = attrs
                    .split(',')
                    .map(|a| a.parse::<u32>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::Parse(format!("bad index `{attrs}`")))?;
                CoefficientIndex::new(ids)
            };
            if j.attributes().iter().any(|&a| a as usize >= dim) {
                return Err(Error::Schema(format!("index {j} outside dimension {dim}")));
            }
            coefficients.insert(j, parse_scalar(value)?);
        }
        Ok(FourierSpectrum {
            dim,
            coefficients,
            order_cutoff,
            captured_energy_fraction: captured,
            energy_bound: bound,
        })
    }
}

/// Spectrum comparison: true iff every coefficient differs by at most `tol`.
pub fn spectra_equal<S: Scalar>(
    a: &FourierSpectrum<S>,
    b: &FourierSpectrum<S>,
    tol: &S,
) -> Result<bool> {
    a.approx_eq(b, tol)
}

/// `Σ_j ω_j²` of the untruncated spectrum, from the paths alone:
/// `Σ_h 2^-|D| f(h)²`.
pub fn exact_total_energy<S: Scalar>(paths: &[TreePath]) -> S {
    paths
        .iter()
        .filter(|p| p.class == 1)
        .fold(S::zero(), |acc, p| {
            acc + S::dyadic(p.conditions.len() as u32)
        })
}

/// `CEF_i = CE_i / (CE_i + (d - i + 1) E_i)`; 1 when `E_i = 0 < CE_i`.
pub fn cumulative_energy_bound<S: Scalar>(
    cumulative: &S,
    order_energy: &S,
    dim: usize,
    order: usize,
) -> S {
    if order_energy.is_zero() {
        return S::one();
    }
    let factor = S::from_count(dim + 1 - order.min(dim + 1));
    cumulative.clone() / (cumulative.clone() + factor * order_energy.clone())
}

/// Coefficients of exactly `order` from the paths.
fn order_coefficients<S: Scalar>(
    paths: &[&TreePath],
    order: usize,
) -> HashMap<CoefficientIndex, S> {
    let mut acc: HashMap<CoefficientIndex, S> = HashMap::new();
    let mut chosen: Vec<usize> = Vec::with_capacity(order);
    for path in paths {
        let depth = path.conditions.len();
        if order > depth {
            continue;
        }
        let weight = S::dyadic(depth as u32);
        // lexicographic k-combinations of the path's conditions
        chosen.clear();
        chosen.extend(0..order);
        loop {
            let mut ids: Vec<u32> = chosen
                .iter()
                .map(|&c| path.conditions[c].0 as u32)
                .collect();
            ids.sort_unstable();
            let negative = chosen.iter().fold(false, |s, &c| s ^ path.conditions[c].1);
            let term = if negative {
                -weight.clone()
            } else {
                weight.clone()
            };
            let slot = acc.entry(CoefficientIndex(ids)).or_insert_with(S::zero);
            *slot = slot.clone() + term;

            let mut k = order;
            while k > 0 && chosen[k - 1] == depth - order + k - 1 {
                k -= 1;
            }
            if k == 0 {
                break;
            }
            chosen[k - 1] += 1;
            for m in k..order {
                chosen[m] = chosen[m - 1] + 1;
            }
        }
    }
    acc
}

/// Thresholded spectrum of the function described by `paths` over `dim`
/// attributes, stopping at the first order whose energy bound reaches
/// `energy_threshold`. A threshold of 1 computes every order.
pub fn dft_paths<S: Scalar>(
    paths: &[TreePath],
    dim: usize,
    energy_threshold: &S,
) -> Result<FourierSpectrum<S>> {
    if paths.is_empty() {
        return Err(Error::InvalidModel("tree has no paths".into()));
    }
    if !(*energy_threshold > S::zero() && *energy_threshold <= S::one()) {
        return Err(Error::InvalidParams(format!(
            "energy threshold {energy_threshold:?} outside (0, 1]"
        )));
    }
    let live: Vec<&TreePath> = paths.iter().filter(|p| p.class == 1).collect();
    let total = exact_total_energy::<S>(paths);
    let max_order = live.iter().map(|p| p.conditions.len()).max().unwrap_or(0);
    let full = *energy_threshold == S::one();

    let mut coefficients = BTreeMap::new();
    let mut cumulative = S::zero();
    let mut cutoff = 0;
    let mut bound = S::one();
    for order in 0..=max_order {
        let level = order_coefficients::<S>(&live, order);
        let energy = level
            .values()
            .fold(S::zero(), |acc, w| acc + w.clone() * w.clone());
        cumulative = cumulative + energy.clone();
        coefficients.extend(level.into_iter().filter(|(_, w)| !w.is_zero()));
        cutoff = order;
        if cumulative.is_zero() {
            // f = 0 so far; nothing to bound against yet
            continue;
        }
        bound = cumulative_energy_bound(&cumulative, &energy, dim, order);
        if !full && bound >= *energy_threshold {
            break;
        }
    }
    if cutoff == max_order {
        // every nonzero order was computed
        bound = S::one();
    }
    let captured = if total.is_zero() {
        S::one()
    } else {
        cumulative / total
    };
    Ok(FourierSpectrum {
        dim,
        coefficients,
        order_cutoff: cutoff,
        captured_energy_fraction: captured,
        energy_bound: bound,
    })
}

/// Thresholded spectrum of a tree.
pub fn dft<S: Scalar>(tree: &HoeffdingTree, energy_threshold: &S) -> Result<FourierSpectrum<S>> {
    dft_paths(&tree.extract_paths(), tree.dim(), energy_threshold)
}

/// Class 1 iff `f(x) >= 1/2`.
pub fn inverse_classify<S: Scalar>(spectrum: &FourierSpectrum<S>, x: &BitVector) -> u8 {
    spectrum.classify(x)
}
