pub mod augment;
pub mod bobproto;
pub mod cli;
pub mod ems;
pub mod regulations;
pub mod session;
pub mod vision;
