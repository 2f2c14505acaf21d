/// Diagonal 0/1 matrix stored as a bit per row.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ActiveMask {
    bits: Vec<bool>,
    popcount: usize,
}

impl ActiveMask {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        let popcount = bits.iter().filter(|&&b| b).count();
        ActiveMask { bits, popcount }
    }

    /// `P = O`
    pub fn empty(n: usize) -> Self {
        ActiveMask {
            bits: vec![false; n],
            popcount: 0,
        }
    }

    /// `P = I`
    pub fn full(n: usize) -> Self {
        ActiveMask {
            bits: vec![true; n],
            popcount: n,
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn popcount(&self) -> usize {
        self.popcount
    }

    pub fn is_full(&self) -> bool {
        self.popcount == self.bits.len()
    }

    /// `true` when every active entry of `other` is also active here.
    pub fn contains(&self, other: &ActiveMask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| a || !b)
    }

    /// Entrywise maximum of two masks.
    pub fn join(&self, other: &ActiveMask) -> ActiveMask {
        ActiveMask::from_bits(
            self.bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| a || b)
                .collect(),
        )
    }

    /// Indices active in `self` but not in `other`.
    pub fn gained_over<'a>(&'a self, other: &'a ActiveMask) -> impl Iterator<Item = usize> + 'a {
        self.bits
            .iter()
            .zip(&other.bits)
            .enumerate()
            .filter(|(_, (&a, &b))| a && !b)
            .map(|(i, _)| i)
    }

    /// Applies the mask to a vector: `P x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.bits)
            .map(|(&v, &b)| if b { v } else { 0.0 })
            .collect()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.bits
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect()
    }
}

/// Threshold for [`active_mask`]: one value for all entries or one per entry.
#[derive(Clone, Copy, Debug)]
pub enum Threshold<'a> {
    Scalar(f64),
    PerEntry(&'a [f64]),
}

impl From<f64> for Threshold<'_> {
    fn from(v: f64) -> Self {
        Threshold::Scalar(v)
    }
}

impl<'a> From<&'a [f64]> for Threshold<'a> {
    fn from(v: &'a [f64]) -> Self {
        Threshold::PerEntry(v)
    }
}

impl<'a> From<&'a Vec<f64>> for Threshold<'a> {
    fn from(v: &'a Vec<f64>) -> Self {
        Threshold::PerEntry(v)
    }
}

/// `P(x)` with `p_i = 1` iff `x_i >= threshold_i`; ties are active.
///
/// # Panics
///
/// If a per-entry threshold does not have the length of `x`.
pub fn active_mask<'a>(x: &[f64], threshold: impl Into<Threshold<'a>>) -> ActiveMask {
    match threshold.into() {
        Threshold::Scalar(t) => ActiveMask::from_bits(x.iter().map(|&v| v >= t).collect()),
        Threshold::PerEntry(t) => {
            assert_eq!(t.len(), x.len(), "threshold length must match x");
            ActiveMask::from_bits(x.iter().zip(t).map(|(&v, &ti)| v >= ti).collect())
        }
    }
}
