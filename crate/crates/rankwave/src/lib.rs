pub mod fluid;
pub mod linalg;
pub mod special;
pub mod solver;
pub mod catalog;
pub mod conditions;
pub mod verifier;
