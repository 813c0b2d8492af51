pub mod codes;
pub mod curves;
pub mod gf;
pub mod linpoly;
pub mod mpoly;
