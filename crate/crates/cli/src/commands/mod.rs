pub mod deconv;
pub mod reconstruct;
pub mod rho;
pub mod verify;
