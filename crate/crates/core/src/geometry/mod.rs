//! Tracking-area layout, cell membership and beam tiling.

mod mobility;

pub use mobility::{MobilityClass, MobilityModel};

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

pub type CellIndex = usize;
pub type BeamIndex = usize;

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min_x: f64,
    pub max_x: f64,
    pub min_y: f64,
    pub max_y: f64,
}

impl Bounds {
    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }
}

pub const DEFAULT_GRID_SIDE: usize = 4;
pub const DEFAULT_INTER_SITE_DISTANCE: f64 = 200.0;

/// Square grid of gNBs centred at the origin, with half an inter-site
/// distance of margin around the outer sites. Every cell of the grid is
/// then an `isd x isd` square Voronoi region.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingArea {
    gnb_positions: Vec<Point>,
    grid_side: usize,
    inter_site_distance: f64,
    bounds: Bounds,
}

impl TrackingArea {
    /// The default 4x4 layout at 200 m pitch.
    pub fn build() -> Self {
        Self::with_grid(DEFAULT_GRID_SIDE, DEFAULT_INTER_SITE_DISTANCE).expect("default grid is valid")
    }

    pub fn with_grid(grid_side: usize, inter_site_distance: f64) -> Result<Self, GeometryError> {
        if grid_side == 0 {
            return Err(GeometryError::InvalidParameter {
                field: "grid_side",
                reason: "must be at least 1".into(),
            });
        }
        if !(inter_site_distance > 0.0 && inter_site_distance.is_finite()) {
            return Err(GeometryError::InvalidParameter {
                field: "inter_site_distance",
                reason: "must be positive".into(),
            });
        }
        let half_span = grid_side as f64 * inter_site_distance / 2.0;
        let first = -half_span + inter_site_distance / 2.0;
        // row-major from the bottom-left site
        let gnb_positions = (0..grid_side)
            .flat_map(|row| {
                (0..grid_side).map(move |col| {
                    Point::new(
                        first + col as f64 * inter_site_distance,
                        first + row as f64 * inter_site_distance,
                    )
                })
            })
            .collect();
        Ok(Self {
            gnb_positions,
            grid_side,
            inter_site_distance,
            bounds: Bounds {
                min_x: -half_span,
                max_x: half_span,
                min_y: -half_span,
                max_y: half_span,
            },
        })
    }

    pub fn gnb_positions(&self) -> &[Point] {
        &self.gnb_positions
    }

    pub fn gnb(&self, cell: CellIndex) -> Point {
        self.gnb_positions[cell]
    }

    pub fn cell_count(&self) -> usize {
        self.gnb_positions.len()
    }

    pub fn grid_side(&self) -> usize {
        self.grid_side
    }

    pub fn inter_site_distance(&self) -> f64 {
        self.inter_site_distance
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    /// Half-width of each (square) cell.
    pub fn cell_half_width(&self) -> f64 {
        self.inter_site_distance / 2.0
    }

    /// Nearest gNB; ties go to the lowest index.
    pub fn serving_cell(&self, position: Point) -> Result<CellIndex, GeometryError> {
        if !self.bounds.contains(&position) {
            return Err(GeometryError::OutOfBounds {
                x: position.x,
                y: position.y,
            });
        }
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, g) in self.gnb_positions.iter().enumerate() {
            let dx = position.x - g.x;
            let dy = position.y - g.y;
            let d = dx * dx + dy * dy;
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        Ok(best)
    }
}

/// Shape assumed for a single cell when tiling it into beams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellShape {
    /// The square Voronoi cell of the grid. Rings are concentric squares and
    /// sectors are equal arcs of the square's perimeter, so every beam has
    /// exactly the same area.
    #[default]
    Square,
    /// A disk of the same area. Rings are circles and sectors are equal
    /// angles; the square cell's corners fall into the outermost ring.
    Disk,
}

/// Ring/sector partition of a cell into `total_beams` beams of equal area.
///
/// `round(sqrt(B/4))` rings; beams are split evenly over rings with any
/// remainder going to the outer rings, and each ring's area is proportional
/// to its beam count.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamTiling {
    total_beams: usize,
    sectors_per_ring: Vec<usize>,
    ring_offsets: Vec<usize>,
    // outer radius of each ring normalised to the cell radius; last is 1
    ring_radii: Vec<f64>,
    cell_radius: f64,
    shape: CellShape,
}

impl BeamTiling {
    /// `cell_half_width` is the half side of the square cell.
    pub fn new(total_beams: usize, cell_half_width: f64, shape: CellShape) -> Result<Self, GeometryError> {
        if total_beams == 0 {
            return Err(GeometryError::InvalidParameter {
                field: "total_beams",
                reason: "must be at least 1".into(),
            });
        }
        let rings = ((total_beams as f64 / 4.0).sqrt().round() as usize).clamp(1, total_beams);
        let base = total_beams / rings;
        let extra = total_beams % rings;
        let sectors_per_ring: Vec<usize> = (0..rings)
            .map(|r| base + usize::from(r >= rings - extra))
            .collect();
        let mut ring_offsets = Vec::with_capacity(rings);
        let mut ring_radii = Vec::with_capacity(rings);
        let mut cum = 0;
        for &s in &sectors_per_ring {
            ring_offsets.push(cum);
            cum += s;
            ring_radii.push((cum as f64 / total_beams as f64).sqrt());
        }
        let cell_radius = match shape {
            CellShape::Square => cell_half_width,
            CellShape::Disk => 2.0 * cell_half_width / std::f64::consts::PI.sqrt(),
        };
        Ok(Self {
            total_beams,
            sectors_per_ring,
            ring_offsets,
            ring_radii,
            cell_radius,
            shape,
        })
    }

    pub fn total_beams(&self) -> usize {
        self.total_beams
    }

    pub fn rings(&self) -> usize {
        self.sectors_per_ring.len()
    }

    pub fn sectors_per_ring(&self) -> &[usize] {
        &self.sectors_per_ring
    }

    pub fn cell_radius(&self) -> f64 {
        self.cell_radius
    }

    pub fn shape(&self) -> CellShape {
        self.shape
    }

    /// Index of the first beam of `ring`.
    pub fn ring_offset(&self, ring: usize) -> usize {
        self.ring_offsets[ring]
    }

    /// `(ring, sector)` for an offset from the gNB.
    pub fn ring_and_sector(&self, dx: f64, dy: f64) -> (usize, usize) {
        let (radial, around) = match self.shape {
            CellShape::Square => (dx.abs().max(dy.abs()), square_perimeter_fraction(dx, dy)),
            CellShape::Disk => {
                let a = dy.atan2(dx);
                let a = if a < 0.0 { a + std::f64::consts::TAU } else { a };
                (dx.hypot(dy), a / std::f64::consts::TAU)
            }
        };
        let r = radial / self.cell_radius;
        let ring = self
            .ring_radii
            .iter()
            .position(|&edge| r < edge)
            .unwrap_or(self.rings() - 1);
        let sectors = self.sectors_per_ring[ring];
        let sector = ((around * sectors as f64) as usize).min(sectors - 1);
        (ring, sector)
    }

    /// Beam covering an offset `(dx, dy)` from the gNB.
    pub fn beam_at_offset(&self, dx: f64, dy: f64) -> BeamIndex {
        let (ring, sector) = self.ring_and_sector(dx, dy);
        self.ring_offsets[ring] + sector
    }
}

// Position along the perimeter of the unit square (counter-clockwise from
// the +x axis) of the ray through (dx, dy), as a fraction in [0, 1).
fn square_perimeter_fraction(dx: f64, dy: f64) -> f64 {
    let m = dx.abs().max(dy.abs());
    if m == 0.0 {
        return 0.0;
    }
    let (x, y) = (dx / m, dy / m);
    let s = if x >= 1.0 && y >= 0.0 {
        y
    } else if y >= 1.0 {
        1.0 + (1.0 - x)
    } else if x <= -1.0 {
        3.0 + (1.0 - y)
    } else if y <= -1.0 {
        5.0 + (x + 1.0)
    } else {
        7.0 + (y + 1.0)
    };
    (s / 8.0).rem_euclid(1.0)
}

/// Beam of `position` within cell `gnb`.
pub fn beam_of(area: &TrackingArea, position: Point, gnb: CellIndex, tiling: &BeamTiling) -> BeamIndex {
    let g = area.gnb(gnb);
    tiling.beam_at_offset(position.x - g.x, position.y - g.y)
}
