pub mod actions;
pub mod agent;
pub mod behavior;
pub mod bench;
pub mod beliefs;
pub mod cli;
pub mod codec;
pub mod controller;
pub mod ctx;
pub mod directory;
pub mod environment;
pub mod executor;
pub mod htn;
pub mod message;
pub mod registry;
pub mod scenarios;
