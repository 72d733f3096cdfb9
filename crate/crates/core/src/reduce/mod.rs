//! The two reductions, with agent maps for moving matchings across them.

mod checks;
mod gadget;
mod lift;

pub use checks::{check_admirer, check_correspondence, check_gadget_confinement, check_preference, CheckReport};
pub use gadget::{
    boundary_lists, complete_instance, delta, hat_p_prime, induce_down, induce_up, GadgetAgent, GadgetMap,
};
pub use lift::{lift_3_to_k, transport_matching_3k, CorrMap3K, Direction, LiftAgent};
