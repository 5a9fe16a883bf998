//! Genus-0 adelic Galois image toolkit: matrix groups mod N, open subgroups of
//! `GL2(Ẑ)`, modular-curve genus, families of groups, rational maps, parameter
//! conditions, surjectivity and the catalog classifier.

pub mod arith;
pub mod limits;
pub mod matgroup;
pub mod modmatrix;
pub mod opengroup;
pub mod modgenus;
pub mod families;
pub mod ratfunc;
pub mod arithcond;
pub mod surjectivity;
pub mod classifier;
