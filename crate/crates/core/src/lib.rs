pub mod controller;
pub mod geom;
pub mod link;
pub mod path;
pub mod sim;
pub mod vehicle;
pub mod world;
