use super::{assign_targets, OptimizerError};
use crate::channel::{ArrayGeometry, Position3};

/// Uniform rectangular transmit array in the `x = 0` plane, centered at the
/// origin and facing `+x`. Columns run along `+y`, rows along `+z`; antenna
/// `r * cols + c` sits at row `r`, column `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
}

impl UniformGrid {
    pub fn new(rows: usize, cols: usize, spacing: f64) -> Result<Self, OptimizerError> {
        if rows == 0 || cols == 0 {
            return Err(OptimizerError::Grid(format!("empty grid {rows}x{cols}")));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(OptimizerError::Grid(format!("grid spacing {spacing}")));
        }
        Ok(UniformGrid {
            rows,
            cols,
            spacing,
        })
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn positions(&self) -> Vec<Position3> {
        let half_c = (self.cols as f64 - 1.0) / 2.0;
        let half_r = (self.rows as f64 - 1.0) / 2.0;
        (0..self.rows)
            .flat_map(|r| {
                (0..self.cols).map(move |c| {
                    Position3::new(
                        0.0,
                        (c as f64 - half_c) * self.spacing,
                        (r as f64 - half_r) * self.spacing,
                    )
                })
            })
            .collect()
    }
}

/// Baseline targets plus the drone-to-target assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct UraPlan {
    pub targets: Vec<Position3>,
    /// `assignment[drone]` indexes `targets`.
    pub assignment: Vec<usize>,
}

impl UraPlan {
    pub fn new(current: &[Position3], targets: Vec<Position3>) -> UraPlan {
        let assignment = assign_targets(current, &targets);
        UraPlan {
            targets,
            assignment,
        }
    }

    pub fn target_of(&self, drone: usize) -> Position3 {
        self.targets[self.assignment[drone]]
    }
}

/// `rx_rows × rx_cols` grid centered at the centroid of `geom.rx_positions`,
/// broadside to the line from the transmit centroid. The transmit grid axes
/// are projected onto that plane; spacing along each axis is
/// `λ R / (N d_t)` with `N` the transmit count on the matching axis and `R`
/// the transmit-centroid to swarm-centroid distance.
pub fn ura_targets(
    geom: &ArrayGeometry,
    tx_grid: &UniformGrid,
    rx_rows: usize,
    rx_cols: usize,
) -> Result<Vec<Position3>, OptimizerError> {
    let n_rx = geom.n_rx();
    if rx_rows * rx_cols != n_rx {
        return Err(OptimizerError::GridSize {
            rows: rx_rows,
            cols: rx_cols,
            n_rx,
        });
    }
    let centroid = mean(&geom.rx_positions);
    let tx_centroid = mean(&geom.tx_positions);
    let line = centroid - tx_centroid;
    let range = line.norm();
    if range <= 1e-9 * tx_grid.spacing {
        return Err(OptimizerError::Boresight);
    }
    let boresight = line / range;

    let col_axis = project_out(Position3::y(), &[boresight]).ok_or(OptimizerError::Boresight)?;
    let row_axis =
        project_out(Position3::z(), &[boresight, col_axis]).ok_or(OptimizerError::Boresight)?;

    let col_spacing = geom.wavelength * range / (tx_grid.cols as f64 * tx_grid.spacing);
    let row_spacing = geom.wavelength * range / (tx_grid.rows as f64 * tx_grid.spacing);
    let half_c = (rx_cols as f64 - 1.0) / 2.0;
    let half_r = (rx_rows as f64 - 1.0) / 2.0;
    let mut targets = Vec::with_capacity(n_rx);
    for r in 0..rx_rows {
        for c in 0..rx_cols {
            targets.push(
                centroid
                    + (c as f64 - half_c) * col_spacing * col_axis
                    + (r as f64 - half_r) * row_spacing * row_axis,
            );
        }
    }
    Ok(targets)
}

fn mean(points: &[Position3]) -> Position3 {
    points.iter().sum::<Position3>() / points.len() as f64
}

fn project_out(v: Position3, against: &[Position3]) -> Option<Position3> {
    let mut w = v;
    for a in against {
        w -= a.dot(&w) * a;
    }
    let n = w.norm();
    (n > 1e-9).then(|| w / n)
}
