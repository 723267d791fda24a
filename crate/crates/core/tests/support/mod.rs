// Shared helpers for integration tests. Each test target compiles this
// module independently, so not every item is used by every target.
#![allow(dead_code)]

pub mod fock;
