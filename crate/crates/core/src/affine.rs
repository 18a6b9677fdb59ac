//! Piecewise affine two-component horseshoe with a known answer.
//!
//! On `N_k = [a_k, a_k + 3] x [0, 6]` the map is `x' = 3 (x - a_k) - 1`,
//! `y' = y / 3 + c_k`. Each strip stretches across both components and is
//! squeezed into a horizontal band of `N_k` or `N_l`, so the invariant set is
//! conjugate to the full shift on two symbols.

use crate::flow::{CubeImage, FlowError};
use crate::grid::{Grid, GridError, RepresentableSet};
use crate::interval::Interval;
use crate::mvmap::CubeEvaluator;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineHorseshoe {
    /// Left edges `a_k` of the two components.
    pub left: [f64; 2],
    /// Band offsets `c_k` as exact fractions `(p, q)`.
    pub lift: [(i32, i32); 2],
}

impl AffineHorseshoe {
    /// `a = (0, 4)`, `c = (2/3, 10/3)`: bands of height 2, `2/3` from the edges and from each other.
    pub fn standard() -> AffineHorseshoe {
        AffineHorseshoe { left: [0.0, 4.0], lift: [(2, 3), (10, 3)] }
    }

    /// Bands `1/4` from the edges: the block check fails at `eta = 1/16` and
    /// `1/32` and passes at `1/64`.
    pub fn tight() -> AffineHorseshoe {
        AffineHorseshoe { left: [0.0, 4.0], lift: [(1, 4), (15, 4)] }
    }

    /// Grid over `[-2, 10] x [-1, 7]`, which holds every value of `N`.
    pub fn grid(&self, eta: f64) -> Result<Grid, GridError> {
        Grid::enclosing([-2.0, -1.0], [10.0, 7.0], eta)
    }

    /// The rectangles `[a_k, a_k + 3] x [0, 6]` as cube sets.
    pub fn components(&self, grid: &Grid) -> Result<[RepresentableSet; 2], GridError> {
        let part = |a: f64| -> Result<RepresentableSet, GridError> {
            let b = [Interval::new(a, a + 3.0).map_err(|_| GridError::OutOfGrid)?, Interval::new(0.0, 6.0).map_err(|_| GridError::OutOfGrid)?];
            grid.cover(&b)
        };
        Ok([part(self.left[0])?, part(self.left[1])?])
    }

    fn branch(&self, x: f64) -> usize {
        usize::from(x >= (self.left[0] + 3.0 + self.left[1]) / 2.0)
    }
}

impl CubeEvaluator for AffineHorseshoe {
    fn eval(&self, center: [f64; 2], _eta: f64) -> Result<CubeImage, FlowError> {
        let k = self.branch(center[0]);
        let (p, q) = self.lift[k];
        let c = Interval::point(p as f64).checked_div(Interval::point(q as f64)).map_err(|_| FlowError::Escaped)?;
        let x = Interval::point(3.0) * (Interval::point(center[0]) - Interval::point(self.left[k])) - Interval::ONE;
        let y = Interval::point(center[1]).checked_div(Interval::point(3.0)).map_err(|_| FlowError::Escaped)? + c;
        // the centre is computed rigorously; its rounding error goes into delta
        Ok(CubeImage {
            center: [x.mid(), y.mid()],
            delta: [radius_about(x), radius_about(y)],
            lipschitz: 3.0,
            flight_time: 0.0,
            flow_lipschitz: 0.0,
        })
    }
}

fn radius_about(i: Interval) -> f64 {
    let m = i.mid();
    (Interval::point(i.hi()) - Interval::point(m)).hi().max((Interval::point(m) - Interval::point(i.lo())).hi())
}
