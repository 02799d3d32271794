//! Small dense semidefinite programs.
//!
//! A problem is posed in the form
//!
//! ```text
//! maximize    tr(C X)
//! subject to  tr(A_i X) = b_i,   X = X_1 ⊕ ... ⊕ X_k ⪰ 0
//! ```
//!
//! with dual `minimize b^T y  s.t.  Σ y_i A_i − C ⪰ 0`. Blocks are complex
//! Hermitian, real symmetric or diagonal (nonnegative LP variables).

mod ipm;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, MatrixJson, C64};

pub use ipm::solve;

/// Shape of one diagonal block of the variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BlockKind {
    Complex(usize),
    Real(usize),
    /// `n` nonnegative scalars.
    Diagonal(usize),
}

impl BlockKind {
    pub fn dim(&self) -> usize {
        match *self {
            BlockKind::Complex(n) | BlockKind::Real(n) | BlockKind::Diagonal(n) => n,
        }
    }
}

/// Block-diagonal Hermitian operator stored as upper-triangle triplets
/// `(block, row, col, value)` with `row <= col`. Repeated positions add up.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BlockSparse {
    entries: Vec<(usize, usize, usize, C64)>,
}

impl BlockSparse {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `v` at `(r, c)` and, implicitly, `conj(v)` at `(c, r)`.
    pub fn push(&mut self, block: usize, r: usize, c: usize, v: C64) {
        if v == C64::new(0.0, 0.0) {
            return;
        }
        if r <= c {
            self.entries.push((block, r, c, v));
        } else {
            self.entries.push((block, c, r, v.conj()));
        }
    }

    pub fn push_real(&mut self, block: usize, r: usize, c: usize, v: f64) {
        self.push(block, r, c, C64::new(v, 0.0));
    }

    /// Adds `scale * m` for a Hermitian `m` (only the upper triangle is read).
    pub fn push_dense(&mut self, block: usize, m: &ComplexMatrix, scale: f64) {
        for r in 0..m.rows() {
            for c in r..m.cols() {
                let v = m[(r, c)] * scale;
                if v.norm() > 0.0 {
                    self.entries.push((block, r, c, v));
                }
            }
        }
    }

    pub fn entries(&self) -> &[(usize, usize, usize, C64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `tr(self · X)` for Hermitian block values `X`.
    pub fn inner(&self, x: &[ComplexMatrix]) -> f64 {
        self.entries
            .iter()
            .map(|&(b, r, c, v)| {
                if r == c {
                    v.re * x[b][(r, r)].re
                } else {
                    2.0 * (v * x[b][(c, r)]).re
                }
            })
            .sum()
    }

    /// Dense form of one block.
    pub fn block_matrix(&self, block: usize, n: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(n, n);
        for &(b, r, c, v) in &self.entries {
            if b != block {
                continue;
            }
            m[(r, c)] += v;
            if r != c {
                m[(c, r)] += v.conj();
            }
        }
        m
    }
}

/// `maximize tr(C X) s.t. tr(A_i X) = b_i, X ⪰ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<BlockKind>,
    pub objective: BlockSparse,
    pub constraints: Vec<(BlockSparse, f64)>,
}

impl SdpProblem {
    pub fn new(blocks: Vec<BlockKind>) -> Self {
        Self {
            blocks,
            objective: BlockSparse::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_constraint(&mut self, a: BlockSparse, b: f64) {
        self.constraints.push((a, b));
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() || self.blocks.iter().any(|b| b.dim() == 0) {
            return Err(Error::MalformedSdp("empty block".into()));
        }
        let check = |op: &BlockSparse, what: &str| -> Result<()> {
            for &(b, r, c, v) in op.entries() {
                let kind = self.blocks.get(b).ok_or_else(|| {
                    Error::MalformedSdp(format!("{what}: block {b} out of range"))
                })?;
                if c >= kind.dim() {
                    return Err(Error::MalformedSdp(format!(
                        "{what}: entry ({r},{c}) outside block {b}"
                    )));
                }
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(Error::NonFinite);
                }
                let real_only = match kind {
                    BlockKind::Complex(_) => r == c,
                    BlockKind::Real(_) => true,
                    BlockKind::Diagonal(_) => {
                        if r != c {
                            return Err(Error::MalformedSdp(format!(
                                "{what}: off-diagonal entry in diagonal block {b}"
                            )));
                        }
                        true
                    }
                };
                if real_only && v.im != 0.0 {
                    return Err(Error::MalformedSdp(format!(
                        "{what}: complex value at ({r},{c}) of block {b}"
                    )));
                }
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        for (i, (a, b)) in self.constraints.iter().enumerate() {
            check(a, &format!("constraint {i}"))?;
            if !b.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        Ok(())
    }

    /// Dense dump of `(C, A_i, b_i)` in the repo matrix format.
    pub fn debug_json(&self) -> serde_json::Value {
        let dump = |op: &BlockSparse| -> Vec<MatrixJson> {
            self.blocks
                .iter()
                .enumerate()
                .map(|(k, kind)| MatrixJson::from(&op.block_matrix(k, kind.dim())))
                .collect()
        };
        serde_json::json!({
            "blocks": self.blocks,
            "objective": dump(&self.objective),
            "constraints": self.constraints.iter().map(|(a, b)| {
                serde_json::json!({"a": dump(a), "b": b})
            }).collect::<Vec<_>>(),
        })
    }
}

/// Maps every complex `n×n` block to a real symmetric `2n×2n` block
/// `[[Re, −Im], [Im, Re]]`. Complex-block data is scaled by ½ so that
/// `tr(½Ã X̃) = tr(A X)` whenever `X̃` is the embedding of `X`; right-hand
/// sides and multipliers are unchanged.
pub fn real_embed(problem: &SdpProblem) -> SdpProblem {
    let blocks = problem
        .blocks
        .iter()
        .map(|k| match *k {
            BlockKind::Complex(n) => BlockKind::Real(2 * n),
            other => other,
        })
        .collect();
    let embed = |op: &BlockSparse| -> BlockSparse {
        let mut out = BlockSparse::new();
        for &(b, r, c, v) in op.entries() {
            match problem.blocks[b] {
                BlockKind::Complex(n) => {
                    let h = 0.5;
                    out.push_real(b, r, c, h * v.re);
                    out.push_real(b, n + r, n + c, h * v.re);
                    if r != c {
                        out.push_real(b, r, n + c, -h * v.im);
                        out.push_real(b, c, n + r, h * v.im);
                    }
                }
                _ => out.entries.push((b, r, c, v)),
            }
        }
        out
    };
    SdpProblem {
        blocks,
        objective: embed(&problem.objective),
        constraints: problem
            .constraints
            .iter()
            .map(|(a, b)| (embed(a), *b))
            .collect(),
    }
}

/// Dense real-symmetric embedding `[[Re, −Im], [Im, Re]]` of a matrix.
pub fn embed_hermitian(m: &ComplexMatrix) -> crate::linalg::RealMatrix {
    let n = m.rows();
    crate::linalg::RealMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = m[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Inverse of [`embed_hermitian`] for a real PSD `2n×2n` matrix that need not
/// have the embedded structure: `(Y11 + Y22)/2 + i (Y21 − Y12)/2`.
pub fn unembed_hermitian(y: &crate::linalg::RealMatrix) -> ComplexMatrix {
    let n = y.rows() / 2;
    ComplexMatrix::from_fn(n, n, |r, c| {
        C64::new(
            0.5 * (y[(r, c)] + y[(n + r, n + c)]),
            0.5 * (y[(n + r, c)] - y[(r, n + c)]),
        )
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SdpStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdpOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-8,
            feas_tol: 1e-8,
            max_iter: 200,
        }
    }
}

/// Value of one block of a solution.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockValue {
    Matrix(ComplexMatrix),
    Diagonal(Vec<f64>),
}

impl BlockValue {
    pub fn diag(&self) -> Vec<f64> {
        match self {
            BlockValue::Matrix(m) => (0..m.rows()).map(|i| m[(i, i)].re).collect(),
            BlockValue::Diagonal(v) => v.clone(),
        }
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        match self {
            BlockValue::Matrix(m) => m.clone(),
            BlockValue::Diagonal(v) => {
                let vals: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
                ComplexMatrix::diag(&vals)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    /// Primal blocks.
    pub x: Vec<BlockValue>,
    /// Dual slack `Σ y_i A_i − C`, per block.
    pub z: Vec<BlockValue>,
    pub y: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    /// Largest `|tr(A_i X) − b_i|`.
    pub primal_infeasibility: f64,
    /// Frobenius norm of the dual residual.
    pub dual_infeasibility: f64,
    pub iterations: usize,
    pub status: SdpStatus,
}

impl SdpSolution {
    /// Diagonal of block `k`.
    pub fn diag(&self, k: usize) -> Vec<f64> {
        self.x[k].diag()
    }

    /// `Ok(self)` when optimal, otherwise [`Error::SdpFailure`].
    pub fn require_optimal(self) -> Result<Self> {
        if self.status == SdpStatus::Optimal {
            Ok(self)
        } else {
            Err(Error::SdpFailure {
                status: self.status,
                gap: self.gap,
                infeasibility: self.primal_infeasibility.max(self.dual_infeasibility),
            })
        }
    }
}
