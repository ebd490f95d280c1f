//! Paths, lifted cycles and symplectic cycle bases.
//!
//! Every cycle is an integer combination of two kinds of primitive: a closed
//! planar loop lifted to one sheet, and an arc between two branch points
//! lifted to both sheets with opposite orientation. Intersection numbers are
//! counted from planar crossings together with the sheet of each lift at the
//! crossing point.

mod basis;
mod intersect;
mod path;

pub use basis::{
    build_cycle_basis, connecting_path, deform_basis, stadium, vanishing_loop, BasisMode, Cycle,
    CycleBasis, PairingPlan, PlanPair, Primitive, PrimitiveKind, LOOP_START_ANGLE,
};
pub use path::{Path, Piece};
