//! Family files: the TOML description of a family of partial isometries.
//!
//! One file drives both the symbolic path (kinds, declared indices, the π
//! table) and the numeric path (matrix literals or structured constructors).
//! Schema:
//!
//! ```toml
//! depth = 6          # chain truncation depth (optional)
//! max_len = 4        # groupoid word-length bound (optional)
//! tol = 1e-10        # numeric tolerance (optional)
//!
//! [[generator]]
//! id = "u"
//! kind = "unitary"         # unitary | infinite_shift | finite_shift | matrix
//! spectrum = "T"           # required for unitary
//!
//! [[generator]]
//! id = "x"
//! kind = "finite_shift"
//! defect = 2
//!
//! [[generator]]
//! id = "m"
//! kind = "matrix"
//! rows = [["0", "0"], ["1", "0"]]          # complex entries, "a+bi" text
//! # or, instead of rows, a direct sum of structured blocks:
//! # construct = [{ block = "truncated_shift", k = 1, dim = 40 }]
//! index = { eps0 = 0, eps_plus = 0, eps_minus = "inf", eps_minus_minus = 0 }
//! # optional expected numeric values at this truncation:
//! # index_truncated = { eps0 = 0, eps_plus = 32, eps_minus = 32, eps_minus_minus = 0 }
//!
//! [[pi]]
//! left = "u"       # signed generator: "u" or "u*"
//! right = "m"
//! nonzero = true
//! ```
//!
//! Unspecified π pairs default to zero. Matrix generators must share one
//! dimension; their symbolic kind is derived from the declared index.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

use wold::graph::{GenId, GeneratorKind, GeneratorSpec, Pi, Signed, SpectrumTag};
use wold::index::{ExtNat, StarIndex};
use wold::numeric::{block_infinite_shift, diag_unitary, direct_sum, make_truncated_shift, CMatrix};

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("duplicate generator id `{0}`")]
    DuplicateId(String),
    #[error("generator `{id}`: {message}")]
    BadGenerator { id: String, message: String },
    #[error("generator `{id}`: bad complex literal `{literal}`")]
    BadComplex { id: String, literal: String },
    #[error("matrix generators must share one dimension (saw {0} and {1})")]
    MixedDimensions(usize, usize),
    #[error("family has no generators")]
    Empty,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFileRaw {
    depth: Option<u32>,
    max_len: Option<usize>,
    tol: Option<f64>,
    #[serde(default, rename = "generator")]
    generators: Vec<GeneratorEntry>,
    #[serde(default, rename = "pi")]
    pi: Vec<PiEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorEntry {
    id: String,
    kind: String,
    spectrum: Option<String>,
    defect: Option<u64>,
    rows: Option<Vec<Vec<String>>>,
    construct: Option<Vec<ConstructBlock>>,
    index: Option<IndexDecl>,
    index_truncated: Option<TruncatedIndexDecl>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "block", rename_all = "snake_case", deny_unknown_fields)]
enum ConstructBlock {
    TruncatedShift { k: usize, dim: usize },
    DiagUnitary { theta: f64, dim: usize },
    BlockShift { half: usize },
    Zero { dim: usize },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexDecl {
    eps0: ExtNatDecl,
    eps_plus: ExtNatDecl,
    eps_minus: ExtNatDecl,
    eps_minus_minus: ExtNatDecl,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncatedIndexDecl {
    pub eps0: usize,
    pub eps_plus: usize,
    pub eps_minus: usize,
    pub eps_minus_minus: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ExtNatDecl {
    Fin(u64),
    Word(String),
}

impl ExtNatDecl {
    fn to_extnat(&self, id: &str) -> Result<ExtNat, FamilyError> {
        match self {
            ExtNatDecl::Fin(n) => Ok(ExtNat::Fin(*n)),
            ExtNatDecl::Word(w) if w == "inf" => Ok(ExtNat::Inf),
            ExtNatDecl::Word(w) => Err(FamilyError::BadGenerator {
                id: id.to_string(),
                message: format!("index entries are integers or \"inf\", got `{w}`"),
            }),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PiEntry {
    left: String,
    right: String,
    nonzero: bool,
}

/// A validated family: the symbolic view, optional concrete matrices, the
/// declared π table, and the file-level parameter defaults.
///
/// A matrix generator with a mixed declared index (nonzero unitary part and
/// nonzero shift part) is not a Wold-family member; it appears in
/// `matrices`/`declared_indices` for the numeric path but has no symbolic
/// spec — classification requires the family to be declared in split form.
#[derive(Debug, Clone)]
pub struct Family {
    pub specs: Vec<GeneratorSpec>,
    pub mixed: Vec<GenId>,
    pub declared_indices: BTreeMap<GenId, StarIndex>,
    pub truncated_indices: BTreeMap<GenId, TruncatedIndexDecl>,
    pub matrices: BTreeMap<GenId, CMatrix>,
    pub pi: Pi,
    pub depth: Option<u32>,
    pub max_len: Option<usize>,
    pub tol: Option<f64>,
}

impl Family {
    pub fn load(path: &Path) -> Result<Family, FamilyError> {
        let text = std::fs::read_to_string(path).map_err(|source| FamilyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Family::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Family, FamilyError> {
        let raw: FamilyFileRaw = toml::from_str(text)?;
        if raw.generators.is_empty() {
            return Err(FamilyError::Empty);
        }
        let mut seen = BTreeSet::new();
        let mut specs = Vec::new();
        let mut mixed = Vec::new();
        let mut declared_indices = BTreeMap::new();
        let mut truncated_indices = BTreeMap::new();
        let mut matrices: BTreeMap<GenId, CMatrix> = BTreeMap::new();

        for entry in &raw.generators {
            if !seen.insert(entry.id.clone()) {
                return Err(FamilyError::DuplicateId(entry.id.clone()));
            }
            let gen_id = GenId::new(entry.id.clone());
            let bad = |message: &str| FamilyError::BadGenerator {
                id: entry.id.clone(),
                message: message.to_string(),
            };
            let declared = entry
                .index
                .as_ref()
                .map(|d| {
                    Ok::<StarIndex, FamilyError>(StarIndex {
                        eps0: d.eps0.to_extnat(&entry.id)?,
                        eps_plus: d.eps_plus.to_extnat(&entry.id)?,
                        eps_minus: d.eps_minus.to_extnat(&entry.id)?,
                        eps_minus_minus: d.eps_minus_minus.to_extnat(&entry.id)?,
                    })
                })
                .transpose()?;

            let kind = match entry.kind.as_str() {
                "unitary" => {
                    let spectrum = entry.spectrum.clone().ok_or_else(|| bad("unitary generators need a spectrum tag"))?;
                    Some(GeneratorKind::Unitary { spectrum: SpectrumTag::new(spectrum) })
                }
                "infinite_shift" => Some(GeneratorKind::InfiniteShift),
                "finite_shift" => {
                    let defect = entry.defect.ok_or_else(|| bad("finite shifts need a defect"))?;
                    if defect == 0 {
                        return Err(bad("defect must be positive"));
                    }
                    Some(GeneratorKind::FiniteShift { defect })
                }
                "matrix" => {
                    let declared = declared
                        .as_ref()
                        .ok_or_else(|| bad("matrix generators need a declared index"))?;
                    derive_matrix_kind(entry, declared)?
                }
                other => return Err(bad(&format!("unknown kind `{other}`"))),
            };

            if entry.kind == "matrix" {
                let m = build_matrix(entry)?;
                matrices.insert(gen_id.clone(), m);
            } else if entry.rows.is_some() || entry.construct.is_some() {
                return Err(bad("only matrix generators carry rows/construct"));
            }

            if let Some(t) = entry.index_truncated {
                truncated_indices.insert(gen_id.clone(), t);
            }
            match kind {
                Some(kind) => {
                    let spec = GeneratorSpec { id: gen_id.clone(), kind };
                    let index = declared.unwrap_or_else(|| spec.index());
                    declared_indices.insert(gen_id, index);
                    specs.push(spec);
                }
                None => {
                    // Mixed index: numeric-only generator.
                    declared_indices
                        .insert(gen_id.clone(), declared.expect("matrix kinds carry an index"));
                    mixed.push(gen_id);
                }
            }
        }

        let mut dim: Option<usize> = None;
        for m in matrices.values() {
            if m.nrows() != m.ncols() {
                return Err(FamilyError::MixedDimensions(m.nrows(), m.ncols()));
            }
            match dim {
                None => dim = Some(m.nrows()),
                Some(d) if d != m.nrows() => {
                    return Err(FamilyError::MixedDimensions(d, m.nrows()))
                }
                Some(_) => {}
            }
        }

        let mut pi = Pi::new();
        for entry in &raw.pi {
            pi.declare(Signed::parse(&entry.left), Signed::parse(&entry.right), entry.nonzero);
        }

        Ok(Family {
            specs,
            mixed,
            declared_indices,
            truncated_indices,
            matrices,
            pi,
            depth: raw.depth,
            max_len: raw.max_len,
            tol: raw.tol,
        })
    }

    pub fn spec(&self, id: &GenId) -> Option<&GeneratorSpec> {
        self.specs.iter().find(|g| &g.id == id)
    }

    /// Specs used when closing the π table: pure members as declared, mixed
    /// numeric-only generators as opaque entries (no closure rules beyond
    /// self rows and adjoint symmetry apply, which is what InfiniteShift
    /// contributes).
    pub fn closure_specs(&self) -> Vec<GeneratorSpec> {
        let mut all = self.specs.clone();
        for id in &self.mixed {
            all.push(GeneratorSpec { id: id.clone(), kind: GeneratorKind::InfiniteShift });
        }
        all
    }
}

/// Symbolic kind of a matrix generator, read off its declared index;
/// `None` for mixed indices (both a unitary and a shift part), which stay
/// numeric-only.
fn derive_matrix_kind(
    entry: &GeneratorEntry,
    declared: &StarIndex,
) -> Result<Option<GeneratorKind>, FamilyError> {
    Ok(match declared.eps_minus {
        ExtNat::Fin(0) => {
            let spectrum = entry
                .spectrum
                .clone()
                .unwrap_or_else(|| format!("spec({})", entry.id));
            Some(GeneratorKind::Unitary { spectrum: SpectrumTag::new(spectrum) })
        }
        ExtNat::Fin(k) => {
            if !declared.eps0.is_zero() {
                None
            } else {
                Some(GeneratorKind::FiniteShift { defect: k })
            }
        }
        ExtNat::Inf => {
            if !declared.eps0.is_zero() {
                None
            } else {
                Some(GeneratorKind::InfiniteShift)
            }
        }
    })
}

fn build_matrix(entry: &GeneratorEntry) -> Result<CMatrix, FamilyError> {
    match (&entry.rows, &entry.construct) {
        (Some(_), Some(_)) => Err(FamilyError::BadGenerator {
            id: entry.id.clone(),
            message: "give rows or construct, not both".into(),
        }),
        (None, None) => Err(FamilyError::BadGenerator {
            id: entry.id.clone(),
            message: "matrix generators need rows or construct".into(),
        }),
        (Some(rows), None) => parse_rows(&entry.id, rows),
        (None, Some(blocks)) => {
            let parts: Vec<CMatrix> = blocks
                .iter()
                .map(|b| build_block(&entry.id, b))
                .collect::<Result<_, _>>()?;
            Ok(direct_sum(&parts))
        }
    }
}

fn build_block(id: &str, block: &ConstructBlock) -> Result<CMatrix, FamilyError> {
    let bad = |message: String| FamilyError::BadGenerator { id: id.to_string(), message };
    match block {
        ConstructBlock::TruncatedShift { k, dim } => {
            make_truncated_shift(*k, *dim).map_err(|e| bad(e.to_string()))
        }
        ConstructBlock::DiagUnitary { theta, dim } => Ok(diag_unitary(&vec![*theta; *dim])),
        ConstructBlock::BlockShift { half } => {
            if *half == 0 {
                return Err(bad("block shift needs a positive half dimension".into()));
            }
            Ok(block_infinite_shift(*half))
        }
        ConstructBlock::Zero { dim } => Ok(CMatrix::zeros(*dim, *dim)),
    }
}

fn parse_rows(id: &str, rows: &[Vec<String>]) -> Result<CMatrix, FamilyError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(FamilyError::BadGenerator {
            id: id.to_string(),
            message: "matrix rows must form a nonempty square".into(),
        });
    }
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (j, lit) in row.iter().enumerate() {
            m[(i, j)] = parse_complex(lit).ok_or_else(|| FamilyError::BadComplex {
                id: id.to_string(),
                literal: lit.clone(),
            })?;
        }
    }
    Ok(m)
}

/// Parses `a+bi` text entries, including bare reals, `i`, `-i`, and `2i`.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return None;
    }
    t.parse::<Complex64>().ok()
}
