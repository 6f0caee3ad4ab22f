pub mod cli;
pub mod cognitive_map;
pub mod protocol_client;
pub mod sim_env;
pub mod td_affordances;
pub mod transport;
pub mod wot_discovery;
