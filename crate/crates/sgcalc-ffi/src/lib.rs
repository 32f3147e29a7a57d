//! C ABI surface for the sgcalc library. Populated alongside the core crate.
