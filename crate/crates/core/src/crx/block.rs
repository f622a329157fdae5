//! Product blocks on `P^1 x P^m`: spaces and operator matrices at one torus weight.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::factor::{FOp, FactorBlock, FactorCache, FactorCtx, Kind};
use crate::exactalg::{Scalar, SparseMatrix};

/// Anti-holomorphic levels on the two factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Levels {
    pub x: i64,
    pub y: i64,
}

impl Levels {
    /// Levels used at weight `k` on `P^1 x P^m` for a given cutoff. At
    /// cutoff 0 the x-level is the smallest at which `O(k)`-valued functions
    /// exist (at least 1), and the y-level is one above the smallest that
    /// carries top-degree classes of `O(-k)`.
    pub fn for_weight(m: usize, k: i64, cutoff: i64) -> Levels {
        Levels { x: (-k).max(1) + cutoff, y: (k - m as i64).max(0) + 1 + cutoff }
    }

    pub fn raised(self, by: i64) -> Levels {
        Levels { x: self.x + by, y: self.y + by }
    }

    pub fn add(self, o: Levels) -> Levels {
        Levels { x: self.x + o.x, y: self.y + o.y }
    }

    pub fn max(self, o: Levels) -> Levels {
        Levels { x: self.x.max(o.x), y: self.y.max(o.y) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Part {
    Scalar,
    VecX,
    VecY,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sector {
    pub qx: usize,
    pub qy: usize,
    pub part: Part,
}

impl Sector {
    pub fn kinds(&self) -> (Kind, Kind) {
        (
            Kind { q: self.qx, vec: self.part == Part::VecX },
            Kind { q: self.qy, vec: self.part == Part::VecY },
        )
    }

    pub fn degree(&self) -> usize {
        self.qx + self.qy
    }
}

/// Which ambient space: scalar forms `A^{0,q}(O(k,-k))` or vector forms `A^{0,q}(T(k,-k))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpaceKind {
    Scalar(usize),
    Vector(usize),
}

impl SpaceKind {
    pub fn degree(self) -> usize {
        match self {
            SpaceKind::Scalar(q) | SpaceKind::Vector(q) => q,
        }
    }
}

/// Geometry of one weight: `n`, `k` and the levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Geometry {
    pub n: usize,
    pub k: i64,
    pub levels: Levels,
}

impl Geometry {
    pub fn m(&self) -> usize {
        self.n - 2
    }

    pub fn ctx_x(&self) -> FactorCtx {
        FactorCtx { nc: 2, twist: self.k, level: self.levels.x }
    }

    pub fn ctx_y(&self) -> FactorCtx {
        FactorCtx { nc: self.n - 1, twist: -self.k, level: self.levels.y }
    }

    pub fn sectors(&self, kind: SpaceKind) -> Vec<Sector> {
        let m = self.m();
        let (q, parts): (usize, &[Part]) = match kind {
            SpaceKind::Scalar(q) => (q, &[Part::Scalar]),
            SpaceKind::Vector(q) => (q, if m == 0 { &[Part::VecX] } else { &[Part::VecX, Part::VecY] }),
        };
        let mut out = Vec::new();
        for qx in 0..=1usize.min(q) {
            let qy = q - qx;
            if qy > m {
                continue;
            }
            for &part in parts {
                out.push(Sector { qx, qy, part });
            }
        }
        out
    }
}

/// Torus weight of a product block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockWeight {
    pub x: Vec<i64>,
    pub y: Vec<i64>,
}

pub struct SectorSpace {
    pub sector: Sector,
    pub xb: Arc<FactorBlock>,
    pub yb: Arc<FactorBlock>,
    pub offset: usize,
}

impl SectorSpace {
    pub fn dim(&self) -> usize {
        self.xb.dim() * self.yb.dim()
    }
}

/// One product space at one block: a list of sectors, each the tensor
/// product of an x-block and a y-block (x index major).
pub struct BlockSpace {
    pub kind: SpaceKind,
    pub sectors: Vec<SectorSpace>,
    pub dim: usize,
}

impl BlockSpace {
    pub fn find(&self, s: &Sector) -> Option<&SectorSpace> {
        self.sectors.iter().find(|x| &x.sector == s)
    }
}

pub fn space(cache: &FactorCache, g: &Geometry, w: &BlockWeight, kind: SpaceKind) -> BlockSpace {
    let (cx, cy) = (g.ctx_x(), g.ctx_y());
    let mut sectors = Vec::new();
    let mut offset = 0;
    for s in g.sectors(kind) {
        let (kx, ky) = s.kinds();
        let xb = cache.block(&cx, kx, &w.x);
        let yb = cache.block(&cy, ky, &w.y);
        let ss = SectorSpace { sector: s, xb, yb, offset };
        offset += ss.dim();
        sectors.push(ss);
    }
    BlockSpace { kind, sectors, dim: offset }
}

/// Product-level operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum POp {
    /// Scalar forms, degree q to q+1.
    Dbar(usize),
    /// Vector forms, degree q to q+1.
    DbarH(usize),
    /// Vector forms of degree q to scalar forms of degree q+1.
    Flat(usize),
    /// Scalar one-forms to degree-zero vectors (exact inverse of `Flat(0)`).
    Sharp0,
}

impl POp {
    pub fn source(self) -> SpaceKind {
        match self {
            POp::Dbar(q) => SpaceKind::Scalar(q),
            POp::DbarH(q) | POp::Flat(q) => SpaceKind::Vector(q),
            POp::Sharp0 => SpaceKind::Scalar(1),
        }
    }

    pub fn target(self) -> SpaceKind {
        match self {
            POp::Dbar(q) | POp::Flat(q) => SpaceKind::Scalar(q + 1),
            POp::DbarH(q) => SpaceKind::Vector(q + 1),
            POp::Sharp0 => SpaceKind::Vector(0),
        }
    }
}

pub(crate) enum Side {
    X,
    Y,
}

fn sign(p: usize) -> i64 {
    if p.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Factor contributions of a product operator on one source sector:
/// (target sector, side, factor op, factor degree, sign).
pub(crate) fn contributions(op: POp, s: Sector) -> Vec<(Sector, Side, FOp, usize, i64)> {
    let Sector { qx, qy, part } = s;
    let up_x = Sector { qx: qx + 1, qy, part };
    let up_y = Sector { qx, qy: qy + 1, part };
    match (op, part) {
        (POp::Dbar(_), Part::Scalar) => {
            vec![(up_x, Side::X, FOp::Dbar, qx, 1), (up_y, Side::Y, FOp::Dbar, qy, sign(qx))]
        }
        (POp::DbarH(_), Part::VecX) => {
            vec![(up_x, Side::X, FOp::DbarH, qx, 1), (up_y, Side::Y, FOp::Dbar, qy, sign(qx))]
        }
        (POp::DbarH(_), Part::VecY) => {
            vec![(up_x, Side::X, FOp::Dbar, qx, 1), (up_y, Side::Y, FOp::DbarH, qy, sign(qx))]
        }
        (POp::Flat(_), Part::VecX) => vec![(
            Sector { qx: qx + 1, qy, part: Part::Scalar },
            Side::X,
            FOp::Flat,
            qx,
            -sign(qy),
        )],
        (POp::Flat(_), Part::VecY) => {
            vec![(Sector { qx, qy: qy + 1, part: Part::Scalar }, Side::Y, FOp::Flat, qy, 1)]
        }
        (POp::Sharp0, Part::Scalar) if qx == 1 => {
            vec![(Sector { qx: 0, qy: 0, part: Part::VecX }, Side::X, FOp::Sharp0, 1, -1)]
        }
        (POp::Sharp0, Part::Scalar) if qy == 1 => {
            vec![(Sector { qx: 0, qy: 0, part: Part::VecY }, Side::Y, FOp::Sharp0, 1, 1)]
        }
        _ => Vec::new(),
    }
}

/// Matrix of a product operator between the block spaces `src` and `tgt`.
pub fn matrix(
    cache: &FactorCache,
    g: &Geometry,
    w: &BlockWeight,
    op: POp,
    src: &BlockSpace,
    tgt: &BlockSpace,
) -> SparseMatrix {
    let (cx, cy) = (g.ctx_x(), g.ctx_y());
    let mut trip: Vec<(usize, usize, Scalar)> = Vec::new();
    for ss in &src.sectors {
        if ss.dim() == 0 {
            continue;
        }
        for (ts, side, fop, fq, sg) in contributions(op, ss.sector) {
            let Some(tt) = tgt.find(&ts) else {
                continue;
            };
            if tt.dim() == 0 {
                continue;
            }
            let sg = Scalar::from_int(sg);
            match side {
                Side::X => {
                    let f = cache.op(&cx, fop, fq, &w.x);
                    let ny = ss.yb.dim();
                    debug_assert_eq!(ny, tt.yb.dim());
                    for (r, c, v) in f.triplets() {
                        let v = &v * &sg;
                        for j in 0..ny {
                            trip.push((tt.offset + r * ny + j, ss.offset + c * ny + j, v.clone()));
                        }
                    }
                }
                Side::Y => {
                    let f = cache.op(&cy, fop, fq, &w.y);
                    let (nys, nyt) = (ss.yb.dim(), tt.yb.dim());
                    debug_assert_eq!(ss.xb.dim(), tt.xb.dim());
                    for (r, c, v) in f.triplets() {
                        let v = &v * &sg;
                        for i in 0..ss.xb.dim() {
                            trip.push((tt.offset + i * nyt + r, ss.offset + i * nys + c, v.clone()));
                        }
                    }
                }
            }
        }
    }
    SparseMatrix::from_triplets(tgt.dim, src.dim, &trip)
}

/// `flat` and `dbar_H` out of vector `q`-forms on one block.
pub fn block_matrices(cache: &FactorCache, g: &Geometry, w: &BlockWeight, q: usize) -> (SparseMatrix, SparseMatrix) {
    let src = space(cache, g, w, SpaceKind::Vector(q));
    let o = space(cache, g, w, SpaceKind::Scalar(q + 1));
    let t = space(cache, g, w, SpaceKind::Vector(q + 1));
    (matrix(cache, g, w, POp::Flat(q), &src, &o), matrix(cache, g, w, POp::DbarH(q), &src, &t))
}

/// Dimension of one block of the space `kind` at the given levels.
pub fn block_space_dim(cache: &FactorCache, g: &Geometry, w: &BlockWeight, kind: SpaceKind) -> usize {
    space(cache, g, w, kind).dim
}
