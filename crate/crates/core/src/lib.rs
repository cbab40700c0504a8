//! Hypertableau reasoning over triple-derived knowledge bases with
//! embedding-guided premise selection and an iterative refocusing loop.

pub mod copa;
pub mod embed;
pub mod engine;
pub mod fixtures;
pub mod kb;
pub mod logic;
pub mod select;
pub mod wander;
