pub mod algebra;
pub mod bounds;
pub mod covers;
pub mod diagram;
pub mod presentation;
pub mod repvar;
pub mod spine;
