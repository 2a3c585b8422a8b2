"""
Comparing two groups with the rank-sum test
===========================================

"""

from shorthrv.stats import rank_sum_test

# Small samples without ties use the exact permutation distribution.
r = rank_sum_test([1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
print(r.method, r.w_statistic, r.p_value)

# Ties, or more than 20 values in total, switch to the normal approximation.
r = rank_sum_test([1, 2, 2, 3], [2, 4, 5, 6, 7])
print(r.method, r.w_statistic, round(r.p_value, 4))

# The statistic depends only on order, so any monotone transform gives the same answer.
import math
a, b = [810.0, 790.0, 845.0, 760.0], [905.0, 870.0, 950.0, 880.0, 930.0]
print(rank_sum_test(a, b).p_value == rank_sum_test([math.log(v) for v in a], [math.log(v) for v in b]).p_value)
