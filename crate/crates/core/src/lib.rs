pub mod expr;
pub mod jet;
pub mod geometry;
pub mod warped;
pub mod gray;
pub mod cli;
