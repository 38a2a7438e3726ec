mod batch;
mod epoch;
mod experiment;
mod newbob;
mod sgd;

pub use batch::{bucket_minibatches, Minibatch};
pub use epoch::{
    decode_corpus, evaluate_token_accuracy, minibatch_gradient, train_epoch, utterance_gradient, EpochStats,
    MinibatchRecord,
};
pub use experiment::*;
pub use newbob::{
    newbob_decide, NewbobAction, NewbobState, DEFAULT_HALVING_THRESHOLD, DEFAULT_LR, DEFAULT_STOP_THRESHOLD,
};
pub use sgd::{sgd_update, OptimizerState, DEFAULT_CLIP, DEFAULT_MINIBATCH_SIZE, DEFAULT_MOMENTUM};
