//! Comparison methods: sparse multivariate Hawkes MLE and logistic models.

mod hawkes;
mod logistic;
mod optim;

pub use hawkes::{
    fit_hawkes, fit_hawkes_select_beta, hawkes_neg_loglik, hawkes_neg_loglik_grad,
    hawkes_predict_next, HawkesFit, BETA_GRID,
};
pub use logistic::{
    fit_logistic, predict_logistic, window_vector, GapRegressor, LogisticModels, SoftmaxClassifier,
    LOGISTIC_MAX_ITERS,
};
