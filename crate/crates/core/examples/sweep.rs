//! A small grid sweep written to stdout, as the `sweep` subcommand does.

use reconlab::cli::{cmd_sweep, SweepConfig};

fn main() {
    let cfg = SweepConfig::from_text(
        "mechanism=boolean-count\nf=and3\nn=30\nd=14\nnoise=bounded\n\
         beta=0,1,4\ndecoder=ls,lp\ntrials=3\nmaster_seed=21\n",
    )
    .unwrap();
    cmd_sweep(&cfg, None, &mut std::io::stdout()).unwrap();
}
