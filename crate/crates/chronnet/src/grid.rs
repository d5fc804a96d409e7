//! Spatial discretization: mapping event coordinates to cell identifiers.
//!
//! Two tilings are supported: rectangular `nx × ny` binning with half-open
//! intervals (upper edges clamp into the last row/column so the bounding box
//! is partitioned without point loss), and a planar flat-top hexagonal tiling
//! assigned by nearest hex center. Cell ids are dense integers, deterministic
//! for a fixed [`GridSpec`], and the node identity of every chronnet.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stable, dense identifier of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellId(pub u32);

impl std::fmt::Display for CellId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Axis-aligned bounding box in data units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl BBox {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        BBox {
            xmin,
            xmax,
            ymin,
            ymax,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.xmin && x <= self.xmax && y >= self.ymin && y <= self.ymax
    }

    fn validate(&self) -> Result<()> {
        let ok = self.xmin.is_finite()
            && self.xmax.is_finite()
            && self.ymin.is_finite()
            && self.ymax.is_finite()
            && self.xmin < self.xmax
            && self.ymin < self.ymax;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid bounding box {self:?}"
            )))
        }
    }
}

/// Grid geometry. Hexagonal cells are flat-top with circumradius `r`,
/// anchored so the first hex center sits at `(xmin, ymin)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GridSpec {
    Rect { bbox: BBox, nx: u32, ny: u32 },
    Hex { bbox: BBox, r: f64 },
}

const SQRT3: f64 = 1.732_050_807_568_877_3;

impl GridSpec {
    pub fn rect(bbox: BBox, nx: u32, ny: u32) -> Result<Self> {
        let g = GridSpec::Rect { bbox, nx, ny };
        g.validate()?;
        Ok(g)
    }

    pub fn hex(bbox: BBox, r: f64) -> Result<Self> {
        let g = GridSpec::Hex { bbox, r };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GridSpec::Rect { bbox, nx, ny } => {
                bbox.validate()?;
                if *nx == 0 || *ny == 0 {
                    return Err(Error::InvalidParameter(
                        "rect grid needs nx >= 1 and ny >= 1".into(),
                    ));
                }
                Ok(())
            }
            GridSpec::Hex { bbox, r } => {
                bbox.validate()?;
                if !(r.is_finite() && *r > 0.0) {
                    return Err(Error::InvalidParameter("hex grid needs r > 0".into()));
                }
                Ok(())
            }
        }
    }

    pub fn bbox(&self) -> &BBox {
        match self {
            GridSpec::Rect { bbox, .. } | GridSpec::Hex { bbox, .. } => bbox,
        }
    }

    /// Total number of cells addressable in this grid.
    pub fn cell_count(&self) -> u32 {
        match self {
            GridSpec::Rect { nx, ny, .. } => nx * ny,
            GridSpec::Hex { .. } => {
                let hex = HexLayout::new(self);
                hex.total
            }
        }
    }

    pub fn is_valid_cell(&self, c: CellId) -> bool {
        c.0 < self.cell_count()
    }

    /// Maps a coordinate to its cell. Points outside the bounding box are an
    /// error; the caller is expected to pre-filter or widen the box.
    pub fn assign_cell(&self, x: f64, y: f64) -> Result<CellId> {
        if !self.bbox().contains(x, y) {
            return Err(Error::OutOfBounds { x, y });
        }
        match self {
            GridSpec::Rect { bbox, nx, ny } => {
                let dx = (bbox.xmax - bbox.xmin) / f64::from(*nx);
                let dy = (bbox.ymax - bbox.ymin) / f64::from(*ny);
                let i = (((x - bbox.xmin) / dx) as u32).min(nx - 1);
                let j = (((y - bbox.ymin) / dy) as u32).min(ny - 1);
                Ok(CellId(j * nx + i))
            }
            GridSpec::Hex { .. } => {
                let hex = HexLayout::new(self);
                Ok(hex.nearest(x, y))
            }
        }
    }

    /// Geometric center of a cell; inverse of [`GridSpec::assign_cell`] in the
    /// sense that `assign_cell(cell_center(c)) == c`.
    pub fn cell_center(&self, c: CellId) -> Result<(f64, f64)> {
        match self {
            GridSpec::Rect { bbox, nx, ny } => {
                if c.0 >= nx * ny {
                    return Err(Error::InvalidCell(c.0));
                }
                let i = c.0 % nx;
                let j = c.0 / nx;
                let dx = (bbox.xmax - bbox.xmin) / f64::from(*nx);
                let dy = (bbox.ymax - bbox.ymin) / f64::from(*ny);
                Ok((
                    bbox.xmin + (f64::from(i) + 0.5) * dx,
                    bbox.ymin + (f64::from(j) + 0.5) * dy,
                ))
            }
            GridSpec::Hex { .. } => {
                let hex = HexLayout::new(self);
                hex.center(c)
            }
        }
    }

    /// Euclidean distance between two cell centers.
    pub fn cell_distance(&self, a: CellId, b: CellId) -> Result<f64> {
        let (ax, ay) = self.cell_center(a)?;
        let (bx, by) = self.cell_center(b)?;
        Ok(((ax - bx).powi(2) + (ay - by).powi(2)).sqrt())
    }

    /// All cell ids in ascending order.
    pub fn all_cells(&self) -> impl Iterator<Item = CellId> {
        (0..self.cell_count()).map(CellId)
    }
}

/// Derived quantities of the hex tiling. Columns are spaced `1.5 r` apart,
/// rows `sqrt(3) r`, with odd columns shifted up half a row. Only centers
/// inside the bounding box are valid cells, so row counts vary per column;
/// ids are assigned column-major over the valid centers.
struct HexLayout {
    xmin: f64,
    ymin: f64,
    r: f64,
    ncols: u32,
    rows: Vec<u32>,
    offsets: Vec<u32>,
    total: u32,
}

impl HexLayout {
    fn new(spec: &GridSpec) -> Self {
        let (bbox, r) = match spec {
            GridSpec::Hex { bbox, r } => (bbox, *r),
            GridSpec::Rect { .. } => unreachable!("hex layout over rect spec"),
        };
        let width = bbox.xmax - bbox.xmin;
        let height = bbox.ymax - bbox.ymin;
        let ncols = (width / (1.5 * r)).floor() as u32 + 1;
        let mut rows = Vec::with_capacity(ncols as usize);
        let mut offsets = Vec::with_capacity(ncols as usize);
        let mut total = 0u32;
        for q in 0..ncols {
            let off = Self::col_y_offset(q, r);
            let n = if off > height {
                0
            } else {
                ((height - off) / (SQRT3 * r)).floor() as u32 + 1
            };
            offsets.push(total);
            rows.push(n);
            total += n;
        }
        HexLayout {
            xmin: bbox.xmin,
            ymin: bbox.ymin,
            r,
            ncols,
            rows,
            offsets,
            total,
        }
    }

    fn col_y_offset(q: u32, r: f64) -> f64 {
        if q % 2 == 1 {
            SQRT3 * r / 2.0
        } else {
            0.0
        }
    }

    fn center_of(&self, q: u32, row: u32) -> (f64, f64) {
        (
            self.xmin + 1.5 * self.r * f64::from(q),
            self.ymin + Self::col_y_offset(q, self.r) + SQRT3 * self.r * f64::from(row),
        )
    }

    fn center(&self, c: CellId) -> Result<(f64, f64)> {
        if c.0 >= self.total {
            return Err(Error::InvalidCell(c.0));
        }
        // Column lookup over the prefix sums.
        let q = match self.offsets.binary_search(&c.0) {
            Ok(mut exact) => {
                // Skip empty columns sharing the same offset.
                while self.rows[exact] == 0 {
                    exact += 1;
                }
                exact
            }
            Err(ins) => ins - 1,
        };
        let row = c.0 - self.offsets[q];
        Ok(self.center_of(q as u32, row))
    }

    /// Nearest valid hex center; equidistant candidates resolve to the
    /// lowest cell id.
    fn nearest(&self, x: f64, y: f64) -> CellId {
        let q_est = ((x - self.xmin) / (1.5 * self.r)).round() as i64;
        let mut best: Option<(f64, CellId)> = None;
        for q in (q_est - 2)..=(q_est + 2) {
            if q < 0 || q >= i64::from(self.ncols) {
                continue;
            }
            let q = q as u32;
            let nrows = self.rows[q as usize];
            if nrows == 0 {
                continue;
            }
            let off = Self::col_y_offset(q, self.r);
            let row_est = ((y - self.ymin - off) / (SQRT3 * self.r)).round() as i64;
            for row in (row_est - 2)..=(row_est + 2) {
                if row < 0 || row >= i64::from(nrows) {
                    continue;
                }
                let row = row as u32;
                let (cx, cy) = self.center_of(q, row);
                let d2 = (x - cx).powi(2) + (y - cy).powi(2);
                let id = CellId(self.offsets[q as usize] + row);
                match best {
                    Some((bd, _)) if d2 >= bd => {}
                    _ => best = Some((d2, id)),
                }
            }
        }
        // The +/-2 window always covers the nearest valid center because
        // columns are 1.5 r apart and rows sqrt(3) r apart.
        best.expect("hex grid has at least one valid cell").1
    }
}
