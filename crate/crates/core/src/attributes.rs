//! Facial attribute schemas, ±1 attribute vectors, and threshold matching.
//!
//! A stranger's profile and every detected face carry an [`AttributeVector`]:
//! an ordered list of binary labels (+1 present, -1 absent) over a fixed
//! [`AttributeSchema`]. Stranger determination compares two vectors by their
//! attribute difference `(N - a.b) / 2` (the Hamming distance) and accepts a
//! match when the difference is at most a threshold.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Default matching threshold for stranger determination.
pub const DEFAULT_THRESHOLD: u32 = 1;

/// The 16 default matching attributes, in wire order.
pub const DEFAULT_MATCHING_NAMES: [&str; 16] = [
    "Arched Eyebrows",
    "Bushy Eyebrows",
    "Big Lips",
    "Big Nose",
    "Pointy Nose",
    "Black Hair",
    "Blond Hair",
    "Brown Hair",
    "Gray Hair",
    "Eyeglasses",
    "Bald",
    "High Cheekbones",
    "Narrow Eyes",
    "Oval Face",
    "Male",
    "Young",
];

/// Auxiliary attributes carried alongside but excluded from matching.
pub const DEFAULT_AUXILIARY_NAMES: [&str; 1] = ["Smiling"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttributeError {
    #[error("schemas do not match: {left} vs {right}")]
    SchemaMismatch { left: String, right: String },
    #[error("schema must declare at least one matching attribute")]
    EmptySchema,
    #[error("duplicate attribute name `{0}`")]
    DuplicateName(String),
    #[error("vector has {got} values but schema has {expected} matching attributes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("attribute values must be +1 or -1, found {0}")]
    BadValue(i8),
    #[error("invalid attribute character `{ch}` at position {pos}")]
    BadChar { pos: usize, ch: char },
    #[error("threshold {threshold} exceeds attribute count {n}")]
    ThresholdTooLarge { threshold: u32, n: usize },
}

/// Ordered attribute name lists: the matching set (size `N`) used for
/// stranger determination plus auxiliary attributes used only downstream
/// (target filtering).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSchema {
    matching_names: Vec<String>,
    auxiliary_names: Vec<String>,
}

impl AttributeSchema {
    /// Builds a schema, rejecting empty matching lists and duplicate names
    /// across both lists.
    pub fn new<S: Into<String>>(
        matching: Vec<S>,
        auxiliary: Vec<S>,
    ) -> Result<Self, AttributeError> {
        let matching_names: Vec<String> = matching.into_iter().map(Into::into).collect();
        let auxiliary_names: Vec<String> = auxiliary.into_iter().map(Into::into).collect();
        if matching_names.is_empty() {
            return Err(AttributeError::EmptySchema);
        }
        let mut seen = std::collections::HashSet::new();
        for name in matching_names.iter().chain(auxiliary_names.iter()) {
            if !seen.insert(name.as_str()) {
                return Err(AttributeError::DuplicateName(name.clone()));
            }
        }
        Ok(Self {
            matching_names,
            auxiliary_names,
        })
    }

    /// The default 16-attribute schema with the auxiliary Smiling attribute.
    pub fn default_schema() -> Arc<Self> {
        Arc::new(
            Self::new(
                DEFAULT_MATCHING_NAMES.to_vec(),
                DEFAULT_AUXILIARY_NAMES.to_vec(),
            )
            .expect("default schema is valid"),
        )
    }

    /// A synthetic schema of `n` matching attributes, for tests and ad-hoc
    /// vectors whose length differs from the default 16.
    pub fn synthetic(n: usize) -> Result<Arc<Self>, AttributeError> {
        let names: Vec<String> = (0..n).map(|i| format!("attr{i}")).collect();
        Ok(Arc::new(Self::new(names, Vec::new())?))
    }

    /// Number of matching attributes `N`.
    pub fn matching_len(&self) -> usize {
        self.matching_names.len()
    }

    pub fn matching_names(&self) -> &[String] {
        &self.matching_names
    }

    pub fn auxiliary_names(&self) -> &[String] {
        &self.auxiliary_names
    }

    fn summary(&self) -> String {
        format!("{} matching attributes", self.matching_len())
    }
}

/// An ordered vector of ±1 attribute labels bound to a schema.
///
/// Values are immutable after construction. Schema agreement between two
/// vectors is checked by name-list equality, not pointer identity, so vectors
/// decoded from files interoperate with in-memory schemas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeVector {
    schema: Arc<AttributeSchema>,
    values: Vec<i8>,
}

impl AttributeVector {
    pub fn new(schema: Arc<AttributeSchema>, values: Vec<i8>) -> Result<Self, AttributeError> {
        if values.len() != schema.matching_len() {
            return Err(AttributeError::LengthMismatch {
                expected: schema.matching_len(),
                got: values.len(),
            });
        }
        if let Some(&bad) = values.iter().find(|v| **v != 1 && **v != -1) {
            return Err(AttributeError::BadValue(bad));
        }
        Ok(Self { schema, values })
    }

    /// Vector with every attribute present.
    pub fn all_positive(schema: Arc<AttributeSchema>) -> Self {
        let values = vec![1; schema.matching_len()];
        Self { schema, values }
    }

    pub fn schema(&self) -> &Arc<AttributeSchema> {
        &self.schema
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Returns a copy with the signs at `indices` flipped.
    pub fn with_flipped(&self, indices: &[usize]) -> Self {
        let mut values = self.values.clone();
        for &i in indices {
            values[i] = -values[i];
        }
        Self {
            schema: Arc::clone(&self.schema),
            values,
        }
    }

    fn check_same_schema(&self, other: &Self) -> Result<(), AttributeError> {
        if self.schema.as_ref() != other.schema.as_ref() {
            return Err(AttributeError::SchemaMismatch {
                left: self.schema.summary(),
                right: other.schema.summary(),
            });
        }
        Ok(())
    }

    /// Inner product `Σ a[i]·b[i]`, in `[-N, N]` with the parity of `N`.
    pub fn inner_product(&self, other: &Self) -> Result<i32, AttributeError> {
        self.check_same_schema(other)?;
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(&a, &b)| i32::from(a) * i32::from(b))
            .sum())
    }

    /// Attribute difference `(N - a·b) / 2`: the number of attributes on
    /// which the two vectors disagree (their Hamming distance).
    pub fn attribute_diff(&self, other: &Self) -> Result<u32, AttributeError> {
        let n = self.len() as i32;
        let ip = self.inner_product(other)?;
        Ok(((n - ip) / 2) as u32)
    }

    /// True when the attribute difference is at most `threshold`.
    pub fn matches(&self, other: &Self, threshold: u32) -> Result<bool, AttributeError> {
        if threshold as usize > self.len() {
            return Err(AttributeError::ThresholdTooLarge {
                threshold,
                n: self.len(),
            });
        }
        Ok(self.attribute_diff(other)? <= threshold)
    }

    /// Wire encoding: one `+` or `-` per attribute in schema order.
    pub fn encode(&self) -> String {
        self.values
            .iter()
            .map(|&v| if v > 0 { '+' } else { '-' })
            .collect()
    }

    /// Parses the `+`/`-` wire encoding against `schema`.
    pub fn decode(s: &str, schema: &Arc<AttributeSchema>) -> Result<Self, AttributeError> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != schema.matching_len() {
            return Err(AttributeError::LengthMismatch {
                expected: schema.matching_len(),
                got: chars.len(),
            });
        }
        let mut values = Vec::with_capacity(chars.len());
        for (pos, ch) in chars.into_iter().enumerate() {
            match ch {
                '+' => values.push(1),
                '-' => values.push(-1),
                ch => return Err(AttributeError::BadChar { pos, ch }),
            }
        }
        Ok(Self {
            schema: Arc::clone(schema),
            values,
        })
    }
}

// Display mirrors the wire encoding so logs and messages agree.
impl fmt::Display for AttributeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}
