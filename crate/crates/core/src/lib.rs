#![no_std]
#![doc = include_str!("../README.md")]

extern crate alloc;

pub mod interval;

pub mod affine;
pub mod algebra;
pub mod conley;
pub mod cubical;
pub mod flow;
pub mod grid;
pub mod isolation;
pub mod mvmap;

pub use grid::{CubeId, Grid, GridError, Rect, RepresentableSet};
pub use interval::{Interval, IntervalError, IntervalVector};
pub use mvmap::{RepresentableMvMap, Value};
