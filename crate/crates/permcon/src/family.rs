//! Families of payoff vectors and matrices over which the permutation
//! statistics take suprema.
//!
//! Two structured kinds avoid materializing exponentially large families:
//! `CappedIndicatorContrast` encodes `{ 1_S - 1_B : S ⊆ A, |S| ≤ cap }`, and
//! `FromVectors` embeds a vector family as matrices whose first `m` rows are
//! copies of the vector and whose remaining rows are zero.
//!
//! Index sets and permutations are 1-based in all serialized forms and
//! 0-based in memory.

use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Identifier of a family member attaining a supremum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MemberId {
    /// Position in an explicit member list.
    Index(usize),
    /// The subset `S ⊆ A` selecting a capped-indicator-contrast member,
    /// stored 0-based and sorted.
    Subset(Vec<usize>),
}

impl Serialize for MemberId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        #[serde(tag = "type", rename_all = "snake_case")]
        enum Repr {
            Index { index: usize },
            Subset { members: Vec<usize> },
        }
        let repr = match self {
            MemberId::Index(i) => Repr::Index { index: *i },
            MemberId::Subset(s) => Repr::Subset {
                members: s.iter().map(|&v| v + 1).collect(),
            },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MemberId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(tag = "type", rename_all = "snake_case")]
        enum Repr {
            Index { index: usize },
            Subset { members: Vec<usize> },
        }
        Ok(match Repr::deserialize(deserializer)? {
            Repr::Index { index } => MemberId::Index(index),
            Repr::Subset { members } => {
                if members.iter().any(|&v| v == 0) {
                    return Err(D::Error::custom("subset members are 1-based"));
                }
                MemberId::Subset(members.into_iter().map(|v| v - 1).collect())
            }
        })
    }
}

/// A statistic value together with the member attaining it.
/// Ties are broken deterministically (lowest index / canonical subset).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticValue {
    pub value: f64,
    pub argmax: MemberId,
}

/// The member structure of a [`VectorFamily`].
#[derive(Debug, Clone, PartialEq)]
pub enum VectorKind {
    /// Explicit list of vectors in `R^n`.
    Explicit(Vec<Vec<f64>>),
    /// `{ 1_S - 1_B : S ⊆ A, |S| ≤ cap }` for disjoint index sets A, B.
    CappedIndicatorContrast {
        a: Vec<usize>,
        b: Vec<usize>,
        cap: usize,
    },
}

/// A family of payoff vectors with entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFamily {
    n: usize,
    kind: VectorKind,
    bound_box: (f64, f64),
    /// Per-index membership for the contrast kind: 0 none, 1 in A, 2 in B.
    marks: Option<Vec<u8>>,
}

impl VectorFamily {
    /// Build an explicit family. Entries are validated strictly against
    /// `[-1, 1]`; the bound box is the tight entry range.
    pub fn explicit(n: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("ambient dimension n must be positive"));
        }
        if vectors.is_empty() {
            return Err(Error::invalid("vector family must have at least one member"));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (idx, v) in vectors.iter().enumerate() {
            if v.len() != n {
                return Err(Error::dimension(format!(
                    "member {idx} has length {} but n = {n}",
                    v.len()
                )));
            }
            for &x in v {
                if !x.is_finite() || x < -1.0 || x > 1.0 {
                    return Err(Error::invalid(format!(
                        "entry {x} of member {idx} outside [-1, 1]"
                    )));
                }
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        Ok(VectorFamily {
            n,
            kind: VectorKind::Explicit(vectors),
            bound_box: (lo, hi),
            marks: None,
        })
    }

    /// Build the capped indicator contrast `{ 1_S - 1_B : S ⊆ A, |S| ≤ cap }`
    /// from disjoint 0-based index sets.
    pub fn capped_indicator_contrast(
        n: usize,
        a: Vec<usize>,
        b: Vec<usize>,
        cap: usize,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("ambient dimension n must be positive"));
        }
        if a.is_empty() || cap == 0 || cap > a.len() {
            return Err(Error::invalid(format!(
                "cap must satisfy 1 <= cap <= |A| (cap = {cap}, |A| = {})",
                a.len()
            )));
        }
        let mut marks = vec![0u8; n];
        for &i in &a {
            if i >= n {
                return Err(Error::invalid(format!("A contains index {i} >= n = {n}")));
            }
            if marks[i] != 0 {
                return Err(Error::invalid(format!("duplicate index {i} in A")));
            }
            marks[i] = 1;
        }
        for &i in &b {
            if i >= n {
                return Err(Error::invalid(format!("B contains index {i} >= n = {n}")));
            }
            if marks[i] != 0 {
                return Err(Error::invalid(format!(
                    "index {i} appears twice or in both A and B"
                )));
            }
            marks[i] = 2;
        }
        let mut a = a;
        let mut b = b;
        a.sort_unstable();
        b.sort_unstable();
        let lo = if b.is_empty() { 0.0 } else { -1.0 };
        Ok(VectorFamily {
            n,
            kind: VectorKind::CappedIndicatorContrast { a, b, cap },
            bound_box: (lo, 1.0),
            marks: Some(marks),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &VectorKind {
        &self.kind
    }

    /// Tight entry range `[lo, hi] ⊆ [-1, 1]`.
    pub fn bound_box(&self) -> (f64, f64) {
        self.bound_box
    }

    /// Whether all entries are nonnegative (hypothesis of the positive-part
    /// bounds).
    pub fn is_nonnegative(&self) -> bool {
        self.bound_box.0 >= 0.0
    }

    pub(crate) fn marks(&self) -> Option<&[u8]> {
        self.marks.as_deref()
    }

    /// Entry `x_i` of the member identified by `id`.
    pub fn member_entry(&self, id: &MemberId, i: usize) -> Result<f64> {
        match (&self.kind, id) {
            (VectorKind::Explicit(vs), MemberId::Index(k)) => vs
                .get(*k)
                .and_then(|v| v.get(i))
                .copied()
                .ok_or_else(|| Error::invalid("member or coordinate out of range")),
            (VectorKind::CappedIndicatorContrast { b, cap, a }, MemberId::Subset(s)) => {
                if s.len() > *cap || s.iter().any(|i| !a.contains(i)) {
                    return Err(Error::invalid("subset is not a valid member selector"));
                }
                let mut x = 0.0;
                if s.binary_search(&i).is_ok() {
                    x += 1.0;
                }
                if b.binary_search(&i).is_ok() {
                    x -= 1.0;
                }
                Ok(x)
            }
            _ => Err(Error::invalid("member id kind does not match family kind")),
        }
    }
}

/// An `n x n` real matrix with entries in `[-1, 1]`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    entries: Vec<f64>,
}

impl Matrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("matrix size n must be positive"));
        }
        if entries.len() != n * n {
            return Err(Error::dimension(format!(
                "expected {} entries for an {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        for &x in &entries {
            if !x.is_finite() || x < -1.0 || x > 1.0 {
                return Err(Error::invalid(format!("entry {x} outside [-1, 1]")));
            }
        }
        Ok(Matrix { n, entries })
    }

    /// The indicator matrix `a_ij = 1{i = j}` whose Hoeffding statistic is
    /// the number of fixed points.
    pub fn identity(n: usize) -> Result<Self> {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Matrix::new(n, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().sum()
    }

    pub fn sum_sq(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum()
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// The member structure of a [`MatrixFamily`].
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixKind {
    Explicit(Vec<Matrix>),
    Singleton(Matrix),
    /// The `a^x` embedding: first `m` rows copies of `x`, remaining rows zero.
    FromVectors { family: VectorFamily, m: usize },
}

/// A family of `n x n` matrices with entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFamily {
    n: usize,
    kind: MatrixKind,
}

impl MatrixFamily {
    pub fn explicit(matrices: Vec<Matrix>) -> Result<Self> {
        let n = match matrices.first() {
            Some(m) => m.n(),
            None => return Err(Error::invalid("matrix family must have at least one member")),
        };
        if matrices.iter().any(|m| m.n() != n) {
            return Err(Error::dimension("all members must share the same size"));
        }
        Ok(MatrixFamily {
            n,
            kind: MatrixKind::Explicit(matrices),
        })
    }

    pub fn singleton(matrix: Matrix) -> Self {
        MatrixFamily {
            n: matrix.n(),
            kind: MatrixKind::Singleton(matrix),
        }
    }

    /// Embed a vector family via the repeated-rows matrix `a^x`.
    pub fn from_vectors(family: VectorFamily, m: usize) -> Result<Self> {
        if m == 0 || m > family.n() {
            return Err(Error::invalid(format!(
                "m must satisfy 1 <= m <= n (m = {m}, n = {})",
                family.n()
            )));
        }
        Ok(MatrixFamily {
            n: family.n(),
            kind: MatrixKind::FromVectors { family, m },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &MatrixKind {
        &self.kind
    }

    /// Whether all member entries are nonnegative.
    pub fn is_nonnegative(&self) -> bool {
        match &self.kind {
            MatrixKind::Explicit(ms) => ms.iter().all(|m| m.min_entry() >= 0.0),
            MatrixKind::Singleton(m) => m.min_entry() >= 0.0,
            MatrixKind::FromVectors { family, .. } => family.is_nonnegative(),
        }
    }
}

/// A doubly centered matrix `d` with the population variance of its
/// Hoeffding statistic: `Var(f) = (1/(n-1)) Σ_ij d_ij²` and
/// `f - E f = Σ_k d_{k σ(k)}` for every permutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenteredMatrix {
    pub n: usize,
    /// Row-major `n x n` entries; rows and columns each sum to zero.
    pub d: Vec<f64>,
    pub variance: f64,
}

impl CenteredMatrix {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }
}

/// Convex nondecreasing test functions for the convex-order check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexTestFunction {
    Identity,
    PositivePart { shift: f64 },
    Exp { rate: f64 },
}

impl ConvexTestFunction {
    pub fn exp(rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::invalid("exponential rate must be >= 0"));
        }
        Ok(ConvexTestFunction::Exp { rate })
    }

    pub fn label(&self) -> String {
        match self {
            ConvexTestFunction::Identity => "identity".to_string(),
            ConvexTestFunction::PositivePart { shift } => format!("positive_part({shift})"),
            ConvexTestFunction::Exp { rate } => format!("exp({rate})"),
        }
    }
}

// ----- serialized schema (1-based index sets) -----

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum VectorFamilySchema {
    Explicit {
        n: usize,
        vectors: Vec<Vec<f64>>,
    },
    CappedIndicatorContrast {
        n: usize,
        a: Vec<usize>,
        b: Vec<usize>,
        cap: usize,
    },
}

impl Serialize for VectorFamily {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let schema = match &self.kind {
            VectorKind::Explicit(vs) => VectorFamilySchema::Explicit {
                n: self.n,
                vectors: vs.clone(),
            },
            VectorKind::CappedIndicatorContrast { a, b, cap } => {
                VectorFamilySchema::CappedIndicatorContrast {
                    n: self.n,
                    a: a.iter().map(|&i| i + 1).collect(),
                    b: b.iter().map(|&i| i + 1).collect(),
                    cap: *cap,
                }
            }
        };
        schema.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for VectorFamily {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let schema = VectorFamilySchema::deserialize(deserializer)?;
        let built = match schema {
            VectorFamilySchema::Explicit { n, vectors } => VectorFamily::explicit(n, vectors),
            VectorFamilySchema::CappedIndicatorContrast { n, a, b, cap } => {
                if a.iter().chain(&b).any(|&i| i == 0) {
                    return Err(D::Error::custom("index sets are 1-based"));
                }
                VectorFamily::capped_indicator_contrast(
                    n,
                    a.into_iter().map(|i| i - 1).collect(),
                    b.into_iter().map(|i| i - 1).collect(),
                    cap,
                )
            }
        };
        built.map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum MatrixFamilySchema {
    Explicit {
        n: usize,
        matrices: Vec<Vec<f64>>,
    },
    Singleton {
        n: usize,
        entries: Vec<f64>,
    },
    FromVectors {
        family: Box<VectorFamily>,
        m: usize,
    },
}

impl Serialize for MatrixFamily {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let schema = match &self.kind {
            MatrixKind::Explicit(ms) => MatrixFamilySchema::Explicit {
                n: self.n,
                matrices: ms.iter().map(|m| m.entries().to_vec()).collect(),
            },
            MatrixKind::Singleton(m) => MatrixFamilySchema::Singleton {
                n: self.n,
                entries: m.entries().to_vec(),
            },
            MatrixKind::FromVectors { family, m } => MatrixFamilySchema::FromVectors {
                family: Box::new(family.clone()),
                m: *m,
            },
        };
        schema.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MatrixFamily {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let schema = MatrixFamilySchema::deserialize(deserializer)?;
        let built = match schema {
            MatrixFamilySchema::Explicit { n, matrices } => matrices
                .into_iter()
                .map(|e| Matrix::new(n, e))
                .collect::<Result<Vec<_>>>()
                .and_then(MatrixFamily::explicit),
            MatrixFamilySchema::Singleton { n, entries } => {
                Matrix::new(n, entries).map(MatrixFamily::singleton)
            }
            MatrixFamilySchema::FromVectors { family, m } => {
                MatrixFamily::from_vectors(*family, m)
            }
        };
        built.map_err(D::Error::custom)
    }
}
