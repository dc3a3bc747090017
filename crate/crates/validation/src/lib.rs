//! Holds the `acceptance` test target, which runs the experiment protocols
//! at full scale and checks them against reference values. It lives in its
//! own package so that it runs after the other workspace tests.
