import matplotlib

# headless runs; tests must not require a display
matplotlib.use("Agg")
