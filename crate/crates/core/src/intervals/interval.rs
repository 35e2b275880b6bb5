use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    #[default]
    Line,
    /// `R/Z`, coordinates in `[0, 1)`.
    Torus,
}

/// Endpoint closure flags. Algorithms treat every interval as `[lo, hi)`;
/// the flags only record how the interval was specified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Closure {
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Default for Closure {
    fn default() -> Self {
        Closure {
            lo_closed: true,
            hi_closed: false,
        }
    }
}

/// An interval of the line or an arc of the torus.
///
/// Torus arcs with `lo > hi` wrap: `[lo, 1) u [0, hi)`. The full torus is
/// `lo = 0, hi = 1`; `lo == hi` is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub space: Space,
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub closure: Closure,
}

/// A half-open piece `[lo, hi)` of the line.
pub type Piece = (f64, f64);

pub(crate) fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

impl Interval {
    pub fn line(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "line interval needs lo <= hi, got [{lo}, {hi})");
        Interval {
            space: Space::Line,
            lo,
            hi,
            closure: Closure::default(),
        }
    }

    pub fn empty(space: Space) -> Self {
        Interval {
            space,
            lo: 0.0,
            hi: 0.0,
            closure: Closure::default(),
        }
    }

    pub fn full_torus() -> Self {
        Interval {
            space: Space::Torus,
            lo: 0.0,
            hi: 1.0,
            closure: Closure::default(),
        }
    }

    /// Torus arc `[lo, hi)` with both endpoints reduced mod 1.
    pub fn torus(lo: f64, hi: f64) -> Self {
        Interval {
            space: Space::Torus,
            lo: frac(lo),
            hi: frac(hi),
            closure: Closure::default(),
        }
    }

    /// Torus arc starting at `start` of length `len`; lengths `>= 1` give the full torus.
    pub fn torus_arc(start: f64, len: f64) -> Self {
        if len >= 1.0 {
            Self::full_torus()
        } else if len <= 0.0 {
            Self::empty(Space::Torus)
        } else {
            let lo = frac(start);
            let hi = frac(lo + len);
            if hi == lo {
                // rounding swallowed a tiny positive length
                Self::empty(Space::Torus)
            } else {
                Self::torus(lo, hi)
            }
        }
    }

    pub fn with_closure(mut self, lo_closed: bool, hi_closed: bool) -> Self {
        self.closure = Closure {
            lo_closed,
            hi_closed,
        };
        self
    }

    pub fn is_full(&self) -> bool {
        self.space == Space::Torus && self.lo == 0.0 && self.hi == 1.0
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }

    pub fn wraps(&self) -> bool {
        self.space == Space::Torus && self.lo > self.hi
    }

    pub fn length(&self) -> f64 {
        self.pieces().iter().map(|p| p.1 - p.0).sum()
    }

    /// Splits a torus arc into at most two line pieces of `[0, 1)`.
    pub fn pieces(&self) -> Vec<Piece> {
        if self.is_empty() {
            return Vec::new();
        }
        if self.wraps() {
            let mut v = Vec::with_capacity(2);
            if self.hi > 0.0 {
                v.push((0.0, self.hi));
            }
            v.push((self.lo, 1.0));
            v
        } else {
            vec![(self.lo, self.hi)]
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match self.space {
            Space::Line => self.lo <= x && x < self.hi,
            Space::Torus => {
                if self.is_empty() {
                    return false;
                }
                let y = frac(x);
                if self.wraps() {
                    y >= self.lo || y < self.hi
                } else {
                    self.lo <= y && y < self.hi
                }
            }
        }
    }

    /// Whether `self` is contained in `other` up to measure-zero boundaries.
    pub fn is_subset_of(&self, other: &Interval) -> bool {
        difference(&self.pieces(), &other.pieces()).is_empty()
    }

    /// Rebuilds an interval from disjoint sorted pieces. `None` if the pieces
    /// do not form a single interval (or arc).
    pub fn from_pieces(space: Space, pieces: &[Piece]) -> Option<Interval> {
        match (space, pieces) {
            (_, []) => Some(Interval::empty(space)),
            (Space::Line, [p]) => Some(Interval::line(p.0, p.1)),
            (Space::Torus, [p]) => Some(if p.0 == 0.0 && p.1 == 1.0 {
                Interval::full_torus()
            } else if p.1 == 1.0 {
                Interval {
                    space,
                    lo: p.0,
                    hi: 0.0,
                    closure: Closure::default(),
                }
            } else {
                Interval::torus(p.0, p.1)
            }),
            (Space::Torus, [a, b]) if a.0 == 0.0 && b.1 == 1.0 => Some(Interval {
                space,
                lo: b.0,
                hi: a.1,
                closure: Closure::default(),
            }),
            _ => None,
        }
    }
}

/// Sorts and merges pieces into a disjoint, sorted list (touching pieces merge).
pub fn normalize(mut pieces: Vec<Piece>) -> Vec<Piece> {
    pieces.retain(|p| p.1 > p.0);
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
    for p in pieces {
        match out.last_mut() {
            Some(last) if p.0 <= last.1 => last.1 = last.1.max(p.1),
            _ => out.push(p),
        }
    }
    out
}

/// `a \ b` for piece lists.
pub fn difference(a: &[Piece], b: &[Piece]) -> Vec<Piece> {
    let b = normalize(b.to_vec());
    let mut out = Vec::new();
    for &(lo, hi) in a {
        let mut cur = lo;
        for &(blo, bhi) in &b {
            if bhi <= cur {
                continue;
            }
            if blo >= hi {
                break;
            }
            if blo > cur {
                out.push((cur, blo));
            }
            cur = cur.max(bhi);
            if cur >= hi {
                break;
            }
        }
        if cur < hi {
            out.push((cur, hi));
        }
    }
    normalize(out)
}

/// Disjoint union of half-open line pieces with incremental insertion.
#[derive(Debug, Clone, Default)]
pub struct IntervalSet {
    pieces: Vec<Piece>,
}

impl IntervalSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, lo: f64, hi: f64) {
        if hi <= lo {
            return;
        }
        // first piece that could touch [lo, hi)
        let start = self.pieces.partition_point(|p| p.1 < lo);
        let mut end = start;
        let (mut nlo, mut nhi) = (lo, hi);
        while end < self.pieces.len() && self.pieces[end].0 <= hi {
            nlo = nlo.min(self.pieces[end].0);
            nhi = nhi.max(self.pieces[end].1);
            end += 1;
        }
        self.pieces.splice(start..end, std::iter::once((nlo, nhi)));
    }

    pub fn insert_interval(&mut self, iv: &Interval) {
        for (lo, hi) in iv.pieces() {
            self.insert(lo, hi);
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }
}
