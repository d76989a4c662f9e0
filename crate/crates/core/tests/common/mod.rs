#![allow(dead_code)]

pub mod oracle;
pub mod phases;
pub mod strategies;
