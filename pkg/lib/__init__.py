# Do not delete
