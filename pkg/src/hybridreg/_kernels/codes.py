# Integer codes shared by both kernel backends (numba cannot dispatch on strings cheaply).
WARD, COMPLETE, AVERAGE, SINGLE = 0, 1, 2, 3
TANH, RELU, IDENTITY = 0, 1, 2

LINKAGE_CODES = {"ward": WARD, "complete": COMPLETE, "average": AVERAGE, "single": SINGLE}
ACTIVATION_CODES = {"tanh": TANH, "relu": RELU, "identity": IDENTITY}
