//! Free-group machinery: words, balls, towers and orbit geometry.

pub mod ball;
pub mod geometry;
pub mod spec;
pub mod word;

pub use ball::{ball_size, enumerate_ball, enumerate_ball_with, BallElement, EnumerationBall, EnumerationOptions, DEFAULT_ELEMENT_CAP};
pub use geometry::{
    convergence_diagnostic, convergence_table, dirichlet_contains, displacement_sandwich,
    fit_decay_ratio, injectivity_radius, injectivity_radius_in_ball, ConvergenceTable,
    InjectivityRadius,
};
pub use spec::{
    spot_check_normality, tower_index, tower_member, word_to_matrix, GroupSpec, Membership,
    SubgroupIndex, TowerIntersection, TowerKind, TowerLevel, TowerSpec, TowerTop,
    TrivialSubgroup, WholeGroup,
};
pub use word::{abelianization, Letter, Word};
