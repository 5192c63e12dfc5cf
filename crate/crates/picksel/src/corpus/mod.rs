//! The on-disk data model: embedding matrices, instruction records, and the
//! corpora that bind them together.
//!
//! A [`Corpus`] couples an ordered list of [`InstructionRecord`]s with up to
//! two [`EmbeddingMatrix`] values, one per [`Space`]. Row `i` of an attached
//! matrix always describes `records[i]`; [`Corpus::validate_alignment`]
//! enforces the pairing. Matrices travel on disk in the CSEB binary format
//! (see [`load_embedding_file`]), records as JSON lines (see
//! [`load_instruction_manifest`]).
//!
//! Embeddings are ingested, never computed: any finite float matrix whose
//! rows can be unit-normalized is a valid concept or skill space. All
//! similarity downstream is the inner product of unit-normalized rows, so
//! [`EmbeddingMatrix::normalize_rows`] is the gateway every matrix passes
//! through before retrieval.

mod cseb;
mod manifest;

pub use cseb::{load_embedding_file, write_embedding_file, CSEB_HEADER_LEN};
pub use manifest::{load_instruction_manifest, save_instruction_manifest};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::sha256_hex16;

/// Allowed drift of a unit row's L2 norm.
pub const NORM_TOLERANCE: f64 = 1e-5;

/// Which representation a vector lives in: what the image shows (concept) or
/// what reasoning the question demands (skill).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Concept,
    Skill,
}

impl Space {
    pub fn opposite(self) -> Space {
        match self {
            Space::Concept => Space::Skill,
            Space::Skill => Space::Concept,
        }
    }

    pub(crate) fn to_byte(self) -> u8 {
        match self {
            Space::Concept => 0,
            Space::Skill => 1,
        }
    }

    pub(crate) fn from_byte(byte: u8) -> Option<Space> {
        match byte {
            0 => Some(Space::Concept),
            1 => Some(Space::Skill),
            _ => None,
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Concept => write!(f, "concept"),
            Space::Skill => write!(f, "skill"),
        }
    }
}

/// Row-major dense matrix of 32-bit floats, one row per corpus record.
///
/// Rows are the unit of meaning: row `i` embeds record `i` of the paired
/// manifest. `normalized` records whether every row has unit L2 norm, which
/// makes inner products cosine similarities. Accumulations happen in f64.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    space: Space,
    dim: usize,
    count: usize,
    normalized: bool,
    data: Vec<f32>,
}

impl EmbeddingMatrix {
    /// Builds a matrix from a flat row-major buffer. The row count is
    /// `data.len() / dim`; entries must be finite.
    pub fn new(space: Space, dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Precondition("matrix dim must be positive".into()));
        }
        if data.len() % dim != 0 {
            return Err(Error::Precondition(format!(
                "data length {} is not a multiple of dim {dim}",
                data.len()
            )));
        }
        let count = data.len() / dim;
        let matrix = EmbeddingMatrix {
            space,
            dim,
            count,
            normalized: false,
            data,
        };
        matrix.validate()?;
        Ok(matrix)
    }

    /// Builds a matrix from per-row vectors, all of which must share a length.
    pub fn from_rows(space: Space, rows: &[Vec<f32>]) -> Result<Self> {
        let dim = match rows.first() {
            Some(first) => first.len(),
            None => return Err(Error::EmptyInput("from_rows needs at least one row".into())),
        };
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        EmbeddingMatrix::new(space, dim, data)
    }

    /// An empty matrix with the given dimensionality.
    pub fn empty(space: Space, dim: usize) -> Self {
        EmbeddingMatrix {
            space,
            dim,
            count: 0,
            normalized: false,
            data: Vec::new(),
        }
    }

    /// Used by the CSEB loader, which trusts nothing: all invariants are
    /// re-checked, including the normalized flag.
    pub(crate) fn from_raw(
        space: Space,
        dim: usize,
        count: usize,
        data: Vec<f32>,
        normalized: bool,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Format("dim must be positive".into()));
        }
        if data.len() != count * dim {
            return Err(Error::Truncation(format!(
                "expected {} payload values, found {}",
                count * dim,
                data.len()
            )));
        }
        let matrix = EmbeddingMatrix {
            space,
            dim,
            count,
            normalized,
            data,
        };
        matrix.validate()?;
        Ok(matrix)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    /// Checks finiteness of every entry and, when the normalized flag is set,
    /// that every row's L2 norm sits within [`NORM_TOLERANCE`] of 1.
    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.rows().enumerate() {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data(format!("non-finite entry in row {i}")));
            }
            if self.normalized {
                let norm = l2_norm(row);
                if (norm - 1.0).abs() > NORM_TOLERANCE {
                    return Err(Error::Data(format!(
                        "row {i} marked normalized but has norm {norm}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Returns a copy with every row divided by its L2 norm (computed in
    /// f64). Idempotent up to float rounding; preserves the space tag.
    pub fn normalize_rows(&self) -> Result<Self> {
        let mut data = self.data.clone();
        for (i, row) in data.chunks_exact_mut(self.dim).enumerate() {
            let norm = l2_norm(row);
            if norm == 0.0 {
                return Err(Error::DegenerateVector { row: i });
            }
            for v in row.iter_mut() {
                *v = (f64::from(*v) / norm) as f32;
            }
        }
        Ok(EmbeddingMatrix {
            space: self.space,
            dim: self.dim,
            count: self.count,
            normalized: true,
            data,
        })
    }

    /// Marks rows that are already unit-length as normalized without touching
    /// their bits. Fails if any row's norm is outside tolerance.
    pub fn assert_normalized(mut self) -> Result<Self> {
        for (i, row) in self.rows().enumerate() {
            let norm = l2_norm(row);
            if (norm - 1.0).abs() > NORM_TOLERANCE {
                return Err(Error::Data(format!(
                    "row {i} has norm {norm}, not unit length"
                )));
            }
        }
        self.normalized = true;
        Ok(self)
    }

    /// Hash of the matrix content (space, shape, flags, payload bits), used
    /// for provenance digests.
    pub fn content_digest(&self) -> String {
        let mut payload = Vec::with_capacity(self.data.len() * 4);
        for v in &self.data {
            payload.extend_from_slice(&v.to_le_bytes());
        }
        let header = [
            self.space.to_byte(),
            self.normalized as u8,
        ];
        let dim = (self.dim as u32).to_le_bytes();
        let count = (self.count as u64).to_le_bytes();
        sha256_hex16([&header[..], &dim[..], &count[..], &payload[..]])
    }
}

pub(crate) fn l2_norm(row: &[f32]) -> f64 {
    row.iter()
        .fold(0.0f64, |acc, v| acc + f64::from(*v) * f64::from(*v))
        .sqrt()
}

/// One pool or benchmark example: an image reference plus its instruction
/// turns and, once extracted, a skill description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstructionRecord {
    pub id: String,
    #[serde(default)]
    pub image_ref: String,
    pub questions: Vec<String>,
    #[serde(default)]
    pub answers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skill_description: Option<String>,
}

impl InstructionRecord {
    pub fn new(id: impl Into<String>, questions: Vec<String>) -> Self {
        InstructionRecord {
            id: id.into(),
            image_ref: String::new(),
            questions,
            answers: Vec::new(),
            skill_description: None,
        }
    }

    /// Field-level invariants; corpus-level ones (id uniqueness) live with
    /// the loaders and [`Corpus::new`].
    pub fn check(&self) -> std::result::Result<(), String> {
        if self.id.is_empty() {
            return Err("record id must be non-empty".into());
        }
        if self.questions.is_empty() || self.questions.iter().any(|q| q.is_empty()) {
            return Err("questions must be non-empty".into());
        }
        if !self.answers.is_empty() && self.answers.len() != self.questions.len() {
            return Err(format!(
                "answers ({}) must be empty or match questions ({})",
                self.answers.len(),
                self.questions.len()
            ));
        }
        Ok(())
    }
}

/// Whether a corpus is the candidate pool or the benchmark being targeted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusRole {
    Pool,
    Benchmark,
}

impl fmt::Display for CorpusRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusRole::Pool => write!(f, "pool"),
            CorpusRole::Benchmark => write!(f, "benchmark"),
        }
    }
}

/// Ordered records plus optional concept/skill matrices, with row `i` of any
/// attached matrix describing `records[i]`.
#[derive(Clone, Debug)]
pub struct Corpus {
    role: CorpusRole,
    records: Vec<InstructionRecord>,
    concept: Option<EmbeddingMatrix>,
    skill: Option<EmbeddingMatrix>,
}

impl Corpus {
    pub fn new(role: CorpusRole, records: Vec<InstructionRecord>) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(records.len());
        for (i, record) in records.iter().enumerate() {
            record.check().map_err(|msg| Error::Parse {
                line: i + 1,
                msg,
            })?;
            if !seen.insert(record.id.clone()) {
                return Err(Error::DuplicateId {
                    id: record.id.clone(),
                    line: i + 1,
                });
            }
        }
        Ok(Corpus {
            role,
            records,
            concept: None,
            skill: None,
        })
    }

    /// A corpus of `count` placeholder records, for embedding files that
    /// arrive without a manifest.
    pub fn with_placeholder_records(role: CorpusRole, count: usize) -> Self {
        let records = (0..count)
            .map(|i| InstructionRecord::new(format!("row{i:06}"), vec![format!("row {i}")]))
            .collect();
        Corpus {
            role,
            records,
            concept: None,
            skill: None,
        }
    }

    pub fn role(&self) -> CorpusRole {
        self.role
    }

    pub fn records(&self) -> &[InstructionRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.records.iter().map(|r| r.id.clone()).collect()
    }

    /// Attaches a matrix to the slot named by its space tag. The matrix must
    /// have one row per record.
    pub fn attach(&mut self, matrix: EmbeddingMatrix) -> Result<()> {
        if matrix.count() != self.records.len() {
            return Err(Error::Alignment(format!(
                "{} matrix has {} rows but corpus has {} records",
                matrix.space(),
                matrix.count(),
                self.records.len()
            )));
        }
        match matrix.space() {
            Space::Concept => self.concept = Some(matrix),
            Space::Skill => self.skill = Some(matrix),
        }
        Ok(())
    }

    pub fn matrix(&self, space: Space) -> Option<&EmbeddingMatrix> {
        match space {
            Space::Concept => self.concept.as_ref(),
            Space::Skill => self.skill.as_ref(),
        }
    }

    /// Like [`Corpus::matrix`] but failing with `MissingSpace`; `what` names
    /// the corpus in the error (e.g. "pool").
    pub fn require_matrix(&self, space: Space, what: &str) -> Result<&EmbeddingMatrix> {
        self.matrix(space).ok_or_else(|| Error::MissingSpace {
            space,
            what: what.to_string(),
        })
    }

    /// Passes iff every attached matrix has exactly one row per record.
    pub fn validate_alignment(&self) -> Result<()> {
        for space in [Space::Concept, Space::Skill] {
            if let Some(matrix) = self.matrix(space) {
                if matrix.count() != self.records.len() {
                    return Err(Error::Alignment(format!(
                        "{space} matrix has {} rows but corpus has {} records",
                        matrix.count(),
                        self.records.len()
                    )));
                }
                if matrix.space() != space {
                    return Err(Error::Alignment(format!(
                        "matrix in the {space} slot is tagged {}",
                        matrix.space()
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
