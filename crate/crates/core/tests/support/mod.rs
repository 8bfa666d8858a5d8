#![allow(dead_code)]

pub mod corpus;
pub mod criteria;
pub mod fixtures;
pub mod props;
