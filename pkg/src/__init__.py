# Data-driven geometric control toolkit
# Main source package
