//! Levels `E_n` of the generalized Cantor set: the `2^n` closed intervals
//! `I_n^i` left after removing central open gaps of relative length `q_k`.
//!
//! A tree stores, per level, the common interval length and the width of the
//! gaps opened at that level. Endpoints are assembled on demand from the
//! binary digits of `i - 1`, so deep levels cost O(n) per query instead of
//! O(2^n) storage.

use std::fmt::Write as _;

use thiserror::Error;

use crate::numerics::{decimal_down, decimal_up, Magnitude, Real};
use crate::seqspec::{SeqError, SequenceSpec};

/// Largest level that [`CantorTree::level`] materializes in full.
pub const MAX_MATERIALIZED_LEVEL: u32 = 20;

/// Relative width of a level length above which construction stops.
pub const MAX_REL_WIDTH: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CantorError {
    #[error("level {n} is outside the built depth 1..={depth}")]
    LevelOutOfRange { n: u32, depth: u32 },
    #[error("index {i} is outside 1..=2^{n}")]
    IndexOutOfRange { n: u32, i: u64 },
    #[error("level {0} has too many intervals to list")]
    TooWide(u32),
    #[error("enclosure of |I_{n}| lost precision (relative width {rel_width:e})")]
    WidthBlowup { n: u32, rel_width: f64 },
    #[error(transparent)]
    Sequence(#[from] SeqError),
}

/// Per-level data shared by all `2^n` intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelShape {
    pub n: u32,
    /// `q_n`, possibly only in log scale.
    pub q: Magnitude,
    /// `|I_n| = prod_{k<=n} (1 - q_k) / 2^n`.
    pub length: Real,
    /// Width `q_n |I_{n-1}|` of every gap opened at this level.
    pub gap: Real,
    /// `q_n` is only known through its logarithm, so the gap enclosure
    /// reaches down to 0 and children are only located inside the parent.
    pub degenerate: bool,
}

/// A gap next to an interval: its width and the level that opened it.
#[derive(Clone, Debug, PartialEq)]
pub struct Gap {
    pub level: u32,
    pub width: Real,
}

/// All intervals of one level, left to right.
#[derive(Clone, Debug, PartialEq)]
pub struct CantorLevel {
    pub n: u32,
    pub intervals: Vec<(Real, Real)>,
    /// `gap_after[j]` separates `intervals[j]` and `intervals[j + 1]`.
    pub gap_after: Vec<Real>,
    pub degenerate: bool,
}

#[derive(Clone, Debug)]
pub struct CantorTree {
    spec: SequenceSpec,
    shapes: Vec<LevelShape>,
    prec: u32,
}

impl CantorTree {
    /// Builds levels `1..=depth`.
    pub fn build(spec: &SequenceSpec, depth: u32, prec: u32) -> Result<CantorTree, CantorError> {
        let one = Real::one(prec);
        let mut shapes = Vec::with_capacity(depth as usize);
        let mut parent = one.clone();
        for n in 1..=depth {
            let q = spec.eval_log_channels(u64::from(n), prec)?.q;
            let degenerate = q.is_log_scale();
            let q_real = q.to_real_saturating();
            let length = ((&one - &q_real) * &parent).div_pow2(1);
            let gap = &q_real * &parent;
            let rel_width = length.rel_width().to_f64();
            if rel_width.is_nan() || rel_width > MAX_REL_WIDTH {
                return Err(CantorError::WidthBlowup { n, rel_width });
            }
            parent = length.clone();
            shapes.push(LevelShape { n, q, length, gap, degenerate });
        }
        Ok(CantorTree { spec: spec.clone(), shapes, prec })
    }

    pub fn spec(&self) -> &SequenceSpec {
        &self.spec
    }

    pub fn depth(&self) -> u32 {
        self.shapes.len() as u32
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn shape(&self, n: u32) -> Result<&LevelShape, CantorError> {
        if n == 0 || n > self.depth() {
            return Err(CantorError::LevelOutOfRange { n, depth: self.depth() });
        }
        Ok(&self.shapes[n as usize - 1])
    }

    pub fn shapes(&self) -> &[LevelShape] {
        &self.shapes
    }

    /// `|I_n|`.
    pub fn length(&self, n: u32) -> Result<&Real, CantorError> {
        Ok(&self.shape(n)?.length)
    }

    fn check_index(&self, n: u32, i: u64) -> Result<(), CantorError> {
        self.shape(n)?;
        if i == 0 || n < 64 && i > 1u64 << n {
            return Err(CantorError::IndexOutOfRange { n, i });
        }
        Ok(())
    }

    /// Endpoints of `I_n^i`.
    pub fn interval(&self, n: u32, i: u64) -> Result<(Real, Real), CantorError> {
        self.check_index(n, i)?;
        let mut left = Real::zero(self.prec);
        let mut parent_len = Real::one(self.prec);
        for k in 1..=n {
            let shape = &self.shapes[k as usize - 1];
            let right_child = ((i - 1) >> (n - k)) & 1 == 1;
            if right_child {
                left = &left + &(&parent_len - &shape.length);
            }
            parent_len = shape.length.clone();
        }
        let right = &left + &parent_len;
        Ok((left, right))
    }

    /// The gap between `I_n^j` and `I_n^{j+1}`.
    pub fn gap_between(&self, n: u32, j: u64) -> Result<Gap, CantorError> {
        self.check_index(n, j + 1)?;
        let level = n - j.trailing_zeros();
        Ok(Gap { level, width: self.shapes[level as usize - 1].gap.clone() })
    }

    /// Nearest removed gaps on each side of `I_n^i`, opened at any level up
    /// to `n`. The outer sides of `I_n^1` and `I_n^{2^n}` have none.
    pub fn gaps(&self, n: u32, i: u64) -> Result<(Option<Gap>, Option<Gap>), CantorError> {
        self.check_index(n, i)?;
        let left = if i > 1 { Some(self.gap_between(n, i - 1)?) } else { None };
        let last = n < 64 && i == 1u64 << n;
        let right = if last { None } else { Some(self.gap_between(n, i)?) };
        Ok((left, right))
    }

    /// All intervals and gaps of level `n`.
    pub fn level(&self, n: u32) -> Result<CantorLevel, CantorError> {
        let shape = self.shape(n)?;
        if n > MAX_MATERIALIZED_LEVEL {
            return Err(CantorError::TooWide(n));
        }
        let count = 1u64 << n;
        let intervals = (1..=count).map(|i| self.interval(n, i)).collect::<Result<Vec<_>, _>>()?;
        let gap_after = (1..count)
            .map(|j| self.gap_between(n, j).map(|g| g.width))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CantorLevel { n, intervals, gap_after, degenerate: shape.degenerate })
    }

    /// First level whose geometry is degenerate, if any.
    pub fn geometry_cap(&self) -> Option<u32> {
        self.shapes.iter().find(|s| s.degenerate).map(|s| s.n)
    }

    /// Endpoint table with columns `n,i,left_lo,left_hi,right_lo,right_hi`.
    pub fn to_csv(&self, max_level: u32) -> Result<String, CantorError> {
        let mut out = String::from("n,i,left_lo,left_hi,right_lo,right_hi\n");
        for n in 1..=max_level.min(self.depth()) {
            let level = self.level(n)?;
            for (idx, (l, r)) in level.intervals.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    n,
                    idx + 1,
                    decimal_down(l.lo()),
                    decimal_up(l.hi()),
                    decimal_down(r.lo()),
                    decimal_up(r.hi())
                )
                .expect("writing to a String");
            }
        }
        Ok(out)
    }
}
