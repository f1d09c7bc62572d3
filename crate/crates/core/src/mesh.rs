//! Structured quadrilateral meshes of rectangular domains.
//!
//! Every cell is an axis-aligned rectangle of the same size, so the map from
//! the reference square `[-1, 1]^2` is affine and diagonal. Cells double as
//! the macro elements of the one-level local projection stabilization.

use crate::error::{Error, Result};

/// How opposite faces of the domain are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Dirichlet,
    Periodic,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    origin: [f64; 2],
    extent: [f64; 2],
    cells: [usize; 2],
    boundary: BoundaryKind,
    vertices: Vec<[f64; 2]>,
    connectivity: Vec<[usize; 4]>,
}

/// Geometry of a single cell, which is also its macro element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    pub index: usize,
    /// Lower-left corner.
    pub origin: [f64; 2],
    /// Side lengths of the rectangle.
    pub size: [f64; 2],
    /// Diagonal length.
    pub diameter: f64,
    pub measure: f64,
}

impl CellGeometry {
    /// Reference point in `[-1, 1]^2` to physical coordinates.
    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + 0.5 * (xi[0] + 1.0) * self.size[0],
            self.origin[1] + 0.5 * (xi[1] + 1.0) * self.size[1],
        ]
    }

    /// Physical point to reference coordinates.
    pub fn inverse_map(&self, x: [f64; 2]) -> [f64; 2] {
        [
            2.0 * (x[0] - self.origin[0]) / self.size[0] - 1.0,
            2.0 * (x[1] - self.origin[1]) / self.size[1] - 1.0,
        ]
    }

    /// Diagonal of the Jacobian `dx/dxi`.
    pub fn jacobian(&self) -> [f64; 2] {
        [0.5 * self.size[0], 0.5 * self.size[1]]
    }

    pub fn jacobian_det(&self) -> f64 {
        0.25 * self.size[0] * self.size[1]
    }
}

impl Mesh {
    pub fn new(
        origin: [f64; 2],
        extent: [f64; 2],
        cells: [usize; 2],
        boundary: BoundaryKind,
    ) -> Result<Self> {
        if !(extent[0] > 0.0 && extent[1] > 0.0) || !extent.iter().all(|e| e.is_finite()) {
            return Err(Error::InvalidMesh(format!(
                "extent must be positive, got {extent:?}"
            )));
        }
        if cells[0] == 0 || cells[1] == 0 {
            return Err(Error::InvalidMesh(format!(
                "cell counts must be positive, got {cells:?}"
            )));
        }
        let [nx, ny] = cells;
        let (vx, vy) = match boundary {
            BoundaryKind::Dirichlet => (nx + 1, ny + 1),
            BoundaryKind::Periodic => (nx, ny),
        };
        let hx = extent[0] / nx as f64;
        let hy = extent[1] / ny as f64;
        let mut vertices = Vec::with_capacity(vx * vy);
        for j in 0..vy {
            for i in 0..vx {
                vertices.push([origin[0] + i as f64 * hx, origin[1] + j as f64 * hy]);
            }
        }
        let vid = |i: usize, j: usize| (j % vy) * vx + (i % vx);
        let mut connectivity = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                connectivity.push([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]);
            }
        }
        Ok(Self {
            origin,
            extent,
            cells,
            boundary,
            vertices,
            connectivity,
        })
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn extent(&self) -> [f64; 2] {
        self.extent
    }

    pub fn cells_per_axis(&self) -> [usize; 2] {
        self.cells
    }

    pub fn boundary_kind(&self) -> BoundaryKind {
        self.boundary
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == BoundaryKind::Periodic
    }

    pub fn num_cells(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// Counterclockwise vertex indices of every cell.
    pub fn connectivity(&self) -> &[[usize; 4]] {
        &self.connectivity
    }

    pub fn cell_size(&self) -> [f64; 2] {
        [
            self.extent[0] / self.cells[0] as f64,
            self.extent[1] / self.cells[1] as f64,
        ]
    }

    /// Mesh width `h`, the common cell diameter.
    pub fn h(&self) -> f64 {
        let [hx, hy] = self.cell_size();
        hx.hypot(hy)
    }

    pub fn area(&self) -> f64 {
        self.extent[0] * self.extent[1]
    }

    /// Cell `(i, j)` in lexicographic order, `i` running fastest.
    pub fn cell_ij(&self, cell: usize) -> (usize, usize) {
        (cell % self.cells[0], cell / self.cells[0])
    }

    pub fn cell(&self, cell: usize) -> CellGeometry {
        let (i, j) = self.cell_ij(cell);
        let size = self.cell_size();
        CellGeometry {
            index: cell,
            origin: [
                self.origin[0] + i as f64 * size[0],
                self.origin[1] + j as f64 * size[1],
            ],
            size,
            diameter: size[0].hypot(size[1]),
            measure: size[0] * size[1],
        }
    }

    /// One macro element per cell (one-level LPS).
    pub fn macro_cells(&self) -> impl Iterator<Item = CellGeometry> + '_ {
        (0..self.num_cells()).map(move |c| self.cell(c))
    }

    /// Vertices lying on the domain boundary; empty for periodic meshes.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        if self.is_periodic() {
            return Vec::new();
        }
        let [nx, ny] = self.cells;
        let mut out = Vec::new();
        for j in 0..=ny {
            for i in 0..=nx {
                if i == 0 || j == 0 || i == nx || j == ny {
                    out.push(j * (nx + 1) + i);
                }
            }
        }
        out
    }

    /// Cell containing `x` together with the reference coordinates of `x`.
    /// Periodic meshes wrap `x` into the box first.
    pub fn locate(&self, x: [f64; 2]) -> (usize, [f64; 2]) {
        let size = self.cell_size();
        let mut ij = [0usize; 2];
        let mut p = x;
        for d in 0..2 {
            let mut rel = x[d] - self.origin[d];
            if self.is_periodic() {
                rel = rel.rem_euclid(self.extent[d]);
                p[d] = self.origin[d] + rel;
            }
            let k = (rel / size[d]).floor();
            ij[d] = (k.max(0.0) as usize).min(self.cells[d] - 1);
        }
        let cell = ij[1] * self.cells[0] + ij[0];
        (cell, self.cell(cell).inverse_map(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_dirichlet_mesh() {
        let m = Mesh::new([-1.0, -1.0], [2.0, 2.0], [2, 2], BoundaryKind::Dirichlet).unwrap();
        assert_eq!(m.num_vertices(), 9);
        assert_eq!(m.num_cells(), 4);
        assert!((m.h() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.boundary_vertices().len(), 8);
        assert_eq!(m.connectivity()[0], [0, 1, 4, 3]);
    }

    #[test]
    fn periodic_identification() {
        let a = 2.0 * std::f64::consts::PI;
        let m = Mesh::new([0.0, 0.0], [a, a], [4, 4], BoundaryKind::Periodic).unwrap();
        assert_eq!(m.num_vertices(), 16);
        assert_eq!(m.num_cells(), 16);
        assert!(m.boundary_vertices().is_empty());
        // last column of cells wraps to the first vertex column
        assert_eq!(m.connectivity()[3], [3, 0, 4, 7]);
        // every vertex is shared by exactly four cells
        let mut mult = [0; 16];
        for c in m.connectivity() {
            for &v in c {
                mult[v] += 1;
            }
        }
        assert!(mult.iter().all(|&k| k == 4));
    }

    #[test]
    fn macro_cells_partition_domain() {
        let m = Mesh::new([-1.0, -1.0], [2.0, 3.0], [3, 5], BoundaryKind::Dirichlet).unwrap();
        let cells: Vec<_> = m.macro_cells().collect();
        assert_eq!(cells.len(), 15);
        let total: f64 = cells.iter().map(|c| c.measure).sum();
        assert!((total - m.area()).abs() <= 1e-12 * m.area());
        for c in &cells {
            assert!(c.measure > 0.0);
            assert!((c.diameter - m.h()).abs() < 1e-15);
        }
        for (k, c) in cells.iter().enumerate() {
            assert_eq!(c.index, k);
        }
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(Mesh::new([0.0, 0.0], [0.0, 1.0], [2, 2], BoundaryKind::Dirichlet).is_err());
        assert!(Mesh::new([0.0, 0.0], [1.0, -1.0], [2, 2], BoundaryKind::Dirichlet).is_err());
        assert!(Mesh::new([0.0, 0.0], [1.0, 1.0], [0, 2], BoundaryKind::Periodic).is_err());
    }

    #[test]
    fn locate_roundtrip() {
        let m = Mesh::new([0.0, 0.0], [1.0, 1.0], [4, 4], BoundaryKind::Periodic).unwrap();
        let (c, xi) = m.locate([0.3, 0.9]);
        let geo = m.cell(c);
        let x = geo.map(xi);
        assert!((x[0] - 0.3).abs() < 1e-14 && (x[1] - 0.9).abs() < 1e-14);
        let (c2, _) = m.locate([1.3, -0.1]);
        assert_eq!(c2, m.locate([0.3, 0.9]).0);
    }
}
