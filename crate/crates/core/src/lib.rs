pub mod asymptotics;
pub mod cli;
pub mod criteria;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod simulate;
pub mod special;
