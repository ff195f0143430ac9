// SPDX-License-Identifier: Apache-2.0

pub mod check;
pub mod fixtures;
pub mod score;
pub mod serve;
pub mod trade;
pub mod whatif;
