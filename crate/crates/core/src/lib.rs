pub mod field;
pub mod linalg;
pub mod poly;
pub mod snf;
pub mod skewset;
pub mod frame;
pub mod skewalgebra;
pub mod structalg;
pub mod descent;
pub mod json;
