#![allow(dead_code)]

pub use ordwb::Ordinal;

pub mod small;

pub fn o(s: &str) -> Ordinal {
    s.parse().expect("ordinal literal")
}
