pub mod bench;
pub mod gen;
pub mod rates;
pub mod reference;
pub mod solve;
