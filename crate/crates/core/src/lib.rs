pub mod affine;
pub mod characters;
pub mod exact;
pub mod identities;
pub mod series;
pub mod macdonald;
pub mod persist;
pub mod weights;
