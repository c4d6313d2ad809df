"""HTTP facade over the validator, router, compliance checker and simulator."""
