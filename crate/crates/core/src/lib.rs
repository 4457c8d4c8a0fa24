//! Poisson line process cells and hierarchical short-route networks.
//!
//! The crate has two halves. The stochastic-geometry half ([`lineproc`],
//! [`cell`]) samples isotropic Poisson line processes and measures the cell
//! left around two points after deleting the lines separating them. The
//! network half ([`netbuild`], [`stats`], [`search`]) augments a spanning
//! tree with a coarse grid, small "hot-spot" boxes and Poisson lines, then
//! measures how much longer network routes are than straight lines.

pub mod cell;
pub mod error;
pub mod exec;
pub mod export;
pub mod geom;
pub mod lineproc;
pub mod netbuild;
pub mod quad;
pub mod search;
pub mod stats;

pub use error::{Error, Result};
pub use exec::Exec;
pub use geom::{Line, Point, Rect, Segment};
