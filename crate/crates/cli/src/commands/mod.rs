pub mod analyze;
pub mod optimize;
pub mod sensitivity;
pub mod validate;
